#pragma once

// Reference computations for the tests. Nothing here calls into the
// library beyond its scalar types.

#include "gietlab/scalar.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace oracle {

using gietlab::BigInt;
using gietlab::Real;
using Rational = boost::multiprecision::mpq_rational;

// Partial quotients of a / b, exact on the binary values, leading zero dropped.
inline std::vector<BigInt> continued_fraction(const Real& a, const Real& b, int n) {
  Rational r = Rational(static_cast<Rational>(a) / static_cast<Rational>(b));
  std::vector<BigInt> out;
  bool first = true;
  while (static_cast<int>(out.size()) < n) {
    BigInt num(numerator(r)), den(denominator(r));
    BigInt q = num / den;
    if (!(first && q == 0)) out.push_back(q);
    first = false;
    Rational frac = r - Rational(q);
    if (frac == 0) break;
    r = 1 / frac;
  }
  return out;
}

inline BigInt fibonacci(int n) {
  BigInt a = 0, b = 1;
  for (int i = 0; i < n; ++i) {
    BigInt c = a + b;
    a = b;
    b = c;
  }
  return a;
}

inline Real pi() {
  static thread_local unsigned digits = 0;
  static thread_local Real value;
  if (digits != Real::default_precision()) {
    value = boost::multiprecision::atan(Real(1)) * 4;
    digits = Real::default_precision();
  }
  return value;
}

// Standard IET with 0-based labels given by top and bottom orders.
struct Iet {
  std::vector<int> top, bottom;
  std::vector<Real> lambda;

  Real left_top(int label) const { return offset(top, label); }
  Real left_bottom(int label) const { return offset(bottom, label); }
  Real length() const {
    Real s = 0;
    for (const auto& l : lambda) s += l;
    return s;
  }
  int label_at(const Real& x) const {
    Real u = 0;
    for (int label : top) {
      u += lambda[label];
      if (x < u) return label;
    }
    return top.back();
  }
  Real apply(const Real& x) const {
    int j = label_at(x);
    return x - left_top(j) + left_bottom(j);
  }

 private:
  Real offset(const std::vector<int>& order, int label) const {
    Real s = 0;
    for (int l : order) {
      if (l == label) return s;
      s += lambda[l];
    }
    throw std::logic_error("label not found");
  }
};

// Top cut points and per-interval translations, for long orbits.
struct Translations {
  std::vector<Real> cuts, shifts;

  explicit Translations(const Iet& T) {
    Real u = 0;
    for (int label : T.top) {
      u += T.lambda[label];
      cuts.push_back(u);
      shifts.push_back(T.left_bottom(label) - T.left_top(label));
    }
  }
  void step(Real& x) const {
    std::size_t i = 0;
    while (i + 1 < cuts.size() && !(x < cuts[i])) ++i;
    x += shifts[i];
  }
};

// h(x) = x + a/(2 pi) sin(2 pi x).
struct SineMap {
  Real a;
  Real value(const Real& x) const { return x + a / (2 * pi()) * sin(2 * pi() * x); }
  Real d1(const Real& x) const { return 1 + a * cos(2 * pi() * x); }
  Real d2(const Real& x) const { return -2 * pi() * a * sin(2 * pi() * x); }
  // Bisection to full working precision.
  Real inverse(const Real& y) const {
    Real lo = 0, hi = 1;
    const Real eps = ldexp(Real(1), -static_cast<int>(Real::default_precision() * 3.3) + 4);
    for (int i = 0; i < 2000 && hi - lo > eps; ++i) {
      Real mid = (lo + hi) / 2;
      if (value(mid) < y) lo = mid;
      else hi = mid;
    }
    return (lo + hi) / 2;
  }
};

// T = h o T0 o h^-1 evaluated by composition.
struct Conjugated {
  Iet base;
  SineMap h;

  Real apply(const Real& x) const { return h.value(base.apply(h.inverse(x))); }
  Real log_derivative(const Real& x) const {
    Real w = h.inverse(x);
    return log(h.d1(base.apply(w))) - log(h.d1(w));
  }
  // S_r log DT(x) telescopes to log Dh(T0^r w) - log Dh(w), w = h^-1(x).
  Real birkhoff(const Real& x, long long r) const {
    Real w = h.inverse(x), v = w;
    Translations tr(base);
    for (long long i = 0; i < r; ++i) tr.step(v);
    return log(h.d1(v)) - log(h.d1(w));
  }
  // D^2 T / DT at x, in double precision throughout.
  double nonlinearity(double x) const {
    const double a = h.a.convert_to<double>(), tau = 2 * std::acos(-1.0);
    auto value = [&](double t) { return t + a / tau * std::sin(tau * t); };
    auto d1 = [&](double t) { return 1 + a * std::cos(tau * t); };
    auto d2 = [&](double t) { return -tau * a * std::sin(tau * t); };
    double lo = 0, hi = 1;
    for (int i = 0; i < 80; ++i) {
      double mid = (lo + hi) / 2;
      (value(mid) < x ? lo : hi) = mid;
    }
    const double w = (lo + hi) / 2;
    const double u = base.apply(Real(w)).convert_to<double>();
    return d2(u) / (d1(u) * d1(w)) - d2(w) / (d1(w) * d1(w));
  }
};

// Integral of |g| over [lo, hi]: sign changes located on a grid and refined
// by bisection, Simpson's rule on each piece.
template <class F>
double integrate_abs(const F& g, double lo, double hi, int grid = 2000, int per_piece = 2000) {
  std::vector<double> cuts{lo};
  const double step = (hi - lo) / grid;
  double prev = g(lo);
  for (int i = 1; i <= grid; ++i) {
    double x = lo + i * step, cur = g(x);
    if ((prev < 0) != (cur < 0)) {
      double a = x - step, b = x;
      for (int k = 0; k < 60; ++k) {
        double m = (a + b) / 2;
        ((g(m) < 0) == (g(a) < 0) ? a : b) = m;
      }
      cuts.push_back((a + b) / 2);
    }
    prev = cur;
  }
  cuts.push_back(hi);
  double total = 0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p], b = cuts[p + 1], h = (b - a) / per_piece;
    double s = 0;
    for (int i = 0; i <= per_piece; ++i) {
      double w = (i == 0 || i == per_piece) ? 1 : (i % 2 ? 4 : 2);
      s += w * std::abs(g(a + i * h));
    }
    total += s * h / 3;
  }
  return total;
}

// First return time of x to [0, L) under the IET.
inline long long return_time(const Iet& T, const Real& x, const Real& L, long long cap) {
  Translations tr(T);
  Real y = x;
  tr.step(y);
  long long n = 1;
  while (!(y < L)) {
    if (++n > cap) throw std::runtime_error("return time above cap");
    tr.step(y);
  }
  return n;
}

using Matrix = Eigen::Matrix<BigInt, Eigen::Dynamic, Eigen::Dynamic>;

inline Matrix multiply(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows(), B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      BigInt s = 0;
      for (Eigen::Index k = 0; k < A.cols(); ++k) s += A(i, k) * B(k, j);
      C(i, j) = s;
    }
  return C;
}

// Orbit w_t = T0^t(0) of the unperturbed map; the orbit of 0 under the
// conjugate is h(w_t).
struct BaseOrbit {
  const Iet* T;
  std::vector<Real> points{Real(0)};
  const Real& at(long long t) {
    while (static_cast<long long>(points.size()) <= t) points.push_back(T->apply(points.back()));
    return points[t];
  }
};

// Cut points of the first return map of T to [0, L): the first landing
// in [0, L) of the backward orbits of the top discontinuities and of L.
inline std::vector<Real> return_map_cuts(const Iet& T, const Real& L, long long cap) {
  auto inverse = [&](const Real& y) {
    // The bottom interval containing y (right-closed at the far end).
    Real v = 0;
    for (std::size_t p = 0; p < T.bottom.size(); ++p) {
      int label = T.bottom[p];
      Real next = v + T.lambda[label];
      if (y < next || p + 1 == T.bottom.size()) return y - v + T.left_top(label);
      v = next;
    }
    return y;
  };
  std::vector<Real> seeds;
  Real u = 0;
  for (std::size_t p = 0; p + 1 < T.top.size(); ++p) {
    u += T.lambda[T.top[p]];
    seeds.push_back(u);
  }
  seeds.push_back(L);
  std::vector<Real> cuts{Real(0), L};
  for (const auto& s : seeds) {
    if (s > 0 && s < L) {
      cuts.push_back(s);
      continue;
    }
    Real y = s;
    long long n = 0;
    do {
      y = inverse(y);
      if (++n > cap) throw std::runtime_error("backward orbit above cap");
    } while (!(y < L));
    if (y > 0) cuts.push_back(y);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<Real> unique;
  for (const auto& c : cuts)
    if (unique.empty() || c - unique.back() > ldexp(Real(1), -100)) unique.push_back(c);
  return unique;
}

}  // namespace oracle
