#include "gietlab/diophantine.hpp"

#include "gietlab/errors.hpp"

#include <mpfr.h>

#include <cmath>

namespace gietlab {

double log_big(const BigInt& v) {
  if (v <= 0) throw Error(ErrorCode::InvalidArgument, "logarithm of a non-positive integer");
  // Split off a power of two so the conversion to double cannot overflow.
  const unsigned bits = msb(v);
  if (bits < 1000) return std::log(v.convert_to<double>());
  const unsigned shift = bits - 60;
  BigInt top = v >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

std::pair<BigInt, BigInt> dyadic_ratio(const Real& a, const Real& b) {
  if (!(a > 0) || !(b > 0)) throw Error(ErrorCode::InvalidArgument, "ratio needs positive values");
  BigInt ma, mb;
  mpfr_exp_t ea = mpfr_get_z_2exp(ma.backend().data(), a.backend().data());
  mpfr_exp_t eb = mpfr_get_z_2exp(mb.backend().data(), b.backend().data());
  if (ea >= eb) ma <<= static_cast<unsigned>(ea - eb);
  else mb <<= static_cast<unsigned>(eb - ea);
  return {ma, mb};
}

std::vector<BigInt> partial_quotients(BigInt p, BigInt q, int n) {
  if (p < 0 || q <= 0) throw Error(ErrorCode::InvalidArgument, "continued fraction needs p >= 0, q > 0");
  std::vector<BigInt> out;
  bool first = true;
  while (static_cast<int>(out.size()) < n && q != 0) {
    BigInt a = p / q;
    BigInt r = p - a * q;
    if (!(first && a == 0)) out.push_back(a);
    first = false;
    p = q;
    q = r;
  }
  return out;
}

template <class S>
std::vector<long> zorich_runs(const Giet<S>& T, int runs, const AccelerationOptions& options) {
  InductionChain<S> chain(T, Acceleration::Zorich, options);
  chain.extend_to(runs);
  std::vector<long> out;
  for (int k = 0; k < runs; ++k) out.push_back(chain.record(k).rv_steps);
  return out;
}

template <class S>
TpgReport tpg_probe(const Giet<S>& T0, int K, const TpgOptions& options) {
  if (K < 3) throw Error(ErrorCode::InvalidArgument, "probe needs at least 3 steps");
  TpgReport r;
  r.steps_requested = K;
  InductionChain<S> chain(T0, Acceleration::Positive, options.acceleration);
  const int d = T0.d();
  IntegerMatrix product = IntegerMatrix::Identity(d, d);
  BigInt norms_product = 1;
  for (int k = 0; k < K; ++k) {
    try {
      chain.extend_to(k + 1);
    } catch (const Error& e) {
      r.truncated = true;
      r.truncation = std::string(error_name(e.code()));
      break;
    }
    const auto& rec = chain.record(k);
    product = (rec.matrix * product).eval();
    TpgStep s{k, matrix_norm(rec.matrix), matrix_norm(product), is_positive(rec.matrix), rec.rv_steps};
    norms_product *= s.step_norm;
    if (s.product_norm > norms_product) r.submultiplicative = false;
    if (!s.positive && r.all_positive) {
      r.all_positive = false;
      r.first_non_positive = k;
    }
    r.steps.push_back(std::move(s));
  }
  r.steps_probed = static_cast<int>(r.steps.size());
  if (r.steps_probed >= 3) {
    std::vector<double> ks, step_logs, product_logs;
    for (const auto& s : r.steps) {
      ks.push_back(s.k);
      step_logs.push_back(log_big(s.step_norm));
      product_logs.push_back(log_big(s.product_norm));
    }
    r.step_fit = ols_fit(ks, step_logs);
    r.product_fit = ols_fit(ks, product_logs);
    r.rho_hat = std::exp(r.product_fit->slope);
    const double log_rho = r.product_fit->slope;
    double hi = -INFINITY, lo = INFINITY;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      double ratio = product_logs[i] - log_rho * (ks[i] + 1);
      hi = std::max(hi, ratio);
      lo = std::min(lo, ratio);
    }
    r.k_hat = std::exp(hi);
    r.k_low = std::exp(lo);
    r.exponential = r.rho_hat > 1;
    r.subexponential = log_rho > 0 && r.step_fit->slope <= options.subexponential_fraction * log_rho;
  }
  return r;
}

template std::vector<long> zorich_runs<double>(const Giet<double>&, int, const AccelerationOptions&);
template std::vector<long> zorich_runs<Real>(const Giet<Real>&, int, const AccelerationOptions&);
template TpgReport tpg_probe<double>(const Giet<double>&, int, const TpgOptions&);
template TpgReport tpg_probe<Real>(const Giet<Real>&, int, const TpgOptions&);

}  // namespace gietlab
