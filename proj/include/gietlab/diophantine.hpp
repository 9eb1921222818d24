#pragma once

#include "gietlab/fit.hpp"
#include "gietlab/induction.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gietlab {

struct TpgOptions {
  AccelerationOptions acceleration;
  // (S) is flagged when the per-step slope stays below this fraction of
  // log rho_hat.
  double subexponential_fraction = 0.1;
};

struct TpgStep {
  int k;
  BigInt step_norm;     // ||A_k||
  BigInt product_norm;  // ||A(0, k+1)|| = ||A_k ... A_0||
  bool positive;
  long rv_steps;
};

struct TpgReport {
  int steps_requested = 0;
  int steps_probed = 0;
  bool truncated = false;
  std::string truncation;  // error name when truncated
  bool all_positive = true;
  int first_non_positive = -1;
  std::vector<TpgStep> steps;
  std::optional<LineFit> step_fit;     // log ||A_k|| against k
  std::optional<LineFit> product_fit;  // log ||A(0, k+1)|| against k
  double rho_hat = 0;
  double k_hat = 0;  // max_k ||A(0, k+1)|| / rho_hat^(k+1)
  double k_low = 0;  // min_k of the same ratio
  bool subexponential = false;
  bool exponential = false;
  bool submultiplicative = true;
};

// Runs K positive acceleration steps and estimates the growth conditions.
// Numerical connections truncate the probe rather than abort it.
template <class Scalar>
TpgReport tpg_probe(const Giet<Scalar>& T0, int K, const TpgOptions& options = {});

// Zorich run lengths of the first `runs` accelerated steps.
template <class Scalar>
std::vector<long> zorich_runs(const Giet<Scalar>& T, int runs,
                              const AccelerationOptions& options = {});

// Exact integers (p, q) with p / q = a / b for binary floating point a, b > 0.
std::pair<BigInt, BigInt> dyadic_ratio(const Real& a, const Real& b);

// First n partial quotients of p / q by the Euclidean algorithm, a leading
// zero quotient dropped. Stops early if the remainder vanishes.
std::vector<BigInt> partial_quotients(BigInt p, BigInt q, int n);

// log of a positive big integer.
double log_big(const BigInt& v);

}  // namespace gietlab
