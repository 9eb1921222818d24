#pragma once

#include "gietlab/experiments.hpp"
#include "oracles/oracles.hpp"

#include <random>

namespace testing {

using namespace gietlab;

inline Giet<Real> golden_iet() {
  std::vector<int> t{0, 1}, b{1, 0};
  Real g = (sqrt(Real(5)) - 1) / 2;
  Vector<Real> lam(2);
  lam << g, 1 - g;
  return make_standard_iet(validate_combinatorics(t, b), lam);
}

inline Giet<Real> rotation(const Real& a) {
  std::vector<int> t{0, 1}, b{1, 0};
  Vector<Real> lam(2);
  lam << a, 1 - a;
  return make_standard_iet(validate_combinatorics(t, b), lam);
}

inline Combinatorics reversal(int d) {
  std::vector<int> t(d), b(d);
  for (int i = 0; i < d; ++i) {
    t[i] = i;
    b[i] = d - 1 - i;
  }
  return validate_combinatorics(t, b);
}

inline Giet<Real> random_iet(const Combinatorics& pi, std::mt19937_64& rng) {
  Vector<Real> lam(pi.d());
  Real total = 0;
  for (int i = 0; i < pi.d(); ++i) {
    lam[i] = random_unit(rng, 256) + Real("0.05");
    total += lam[i];
  }
  return make_standard_iet(pi, Vector<Real>(lam / total));
}

// Amplitude of the test conjugacy h(x) = x - (0.1 / 2 pi) sin(2 pi x).
inline Real epsilon() { return Real("-0.1"); }

inline Giet<Real> conjugated(const Giet<Real>& T0) {
  return conjugate_by_diffeo(T0, sine_perturbation(epsilon(), 1));
}

inline oracle::Iet oracle_of(const Giet<Real>& T0) {
  oracle::Iet o;
  o.top = T0.combinatorics().top_order();
  o.bottom = T0.combinatorics().bottom_order();
  for (int i = 0; i < T0.d(); ++i) o.lambda.push_back(T0.top_interval(i).length());
  return o;
}

inline oracle::Conjugated oracle_conjugated(const Giet<Real>& T0) {
  return {oracle_of(T0), oracle::SineMap{epsilon()}};
}

inline Real rmax(const Real& a, const Real& b) { return a < b ? b : a; }

inline Real uniform(std::mt19937_64& rng, double lo, double hi) {
  return Real(lo) + Real(hi - lo) * random_unit(rng, 256);
}

}  // namespace testing
