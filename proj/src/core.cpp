#include "gietlab/combinatorics.hpp"
#include "gietlab/errors.hpp"
#include "gietlab/scalar.hpp"

#include <mpfr.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace gietlab {

// ---------------------------------------------------------------- scalars

int digits10_for_bits(int bits) {
  if (bits < 16) bits = 16;
  return static_cast<int>(std::ceil(bits * 0.30102999566398120)) + 1;
}

PrecisionScope::PrecisionScope(int bits) : previous_(Real::default_precision()) {
  Real::default_precision(static_cast<unsigned>(digits10_for_bits(bits)));
}

PrecisionScope::~PrecisionScope() { Real::default_precision(previous_); }

double ScalarTraits<double>::from_string(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::InvalidArgument, "not a decimal number: '" + s + "'");
  return v;
}

std::string ScalarTraits<double>::to_string(const double& x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Real ScalarTraits<Real>::unit_roundoff(const Real& x) {
  long bits = static_cast<long>(mpfr_get_prec(x.backend().data()));
  return ldexp(Real(1), static_cast<int>(-bits));
}

Real ScalarTraits<Real>::from_string(const std::string& s) {
  try {
    return Real(s);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "not a decimal number: '" + s + "'");
  }
}

std::string ScalarTraits<Real>::to_string(const Real& x) {
  long bits = static_cast<long>(mpfr_get_prec(x.backend().data()));
  auto digits = static_cast<std::streamsize>(std::ceil(bits * 0.30102999566398120)) + 2;
  return x.str(digits, std::ios_base::scientific);
}

void ScalarTraits<Real>::sin_cos(const Real& x, Real& s, Real& c) {
  mpfr_sin_cos(s.backend().data(), c.backend().data(), x.backend().data(), MPFR_RNDN);
}

template <>
const double& pi_constant<double>() {
  static const double pi = std::acos(-1.0);
  return pi;
}

template <>
const Real& pi_constant<Real>() {
  thread_local unsigned cached_digits = 0;
  thread_local Real pi;
  unsigned digits = Real::default_precision();
  if (cached_digits != digits) {
    pi = Real();
    mpfr_const_pi(pi.backend().data(), MPFR_RNDN);
    cached_digits = digits;
  }
  return pi;
}

bool fits_int64(const BigInt& v) {
  static const BigInt lo(std::numeric_limits<long long>::min());
  static const BigInt hi(std::numeric_limits<long long>::max());
  return v >= lo && v <= hi;
}

long long to_int64(const BigInt& v) {
  if (!fits_int64(v)) throw Error(ErrorCode::DepthBudget, "integer exceeds 64-bit range");
  return v.convert_to<long long>();
}

// ----------------------------------------------------------------- errors

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NotAPermutation: return "NotAPermutation";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NotADiffeo: return "NotADiffeo";
    case ErrorCode::AtSingularity: return "AtSingularity";
    case ErrorCode::NumericalConnection: return "NumericalConnection";
    case ErrorCode::RunLimitExceeded: return "RunLimitExceeded";
    case ErrorCode::PositivityTimeout: return "PositivityTimeout";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::FloorBudgetExceeded: return "FloorBudgetExceeded";
    case ErrorCode::OnBoundary: return "OnBoundary";
    case ErrorCode::ScaleNotFound: return "ScaleNotFound";
    case ErrorCode::OrbitHitsSingularity: return "OrbitHitsSingularity";
    case ErrorCode::WindowExhausted: return "WindowExhausted";
    case ErrorCode::DepthBudget: return "DepthBudget";
    case ErrorCode::NotSameFloor: return "NotSameFloor";
    case ErrorCode::PartitionMismatch: return "PartitionMismatch";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
    case ErrorCode::NotAPermutation:
    case ErrorCode::Reducible:
    case ErrorCode::NotADiffeo:
      return 2;
    case ErrorCode::NumericalConnection:
    case ErrorCode::AtSingularity:
    case ErrorCode::OrbitHitsSingularity:
      return 3;
    case ErrorCode::RunLimitExceeded:
    case ErrorCode::PositivityTimeout:
    case ErrorCode::FloorBudgetExceeded:
    case ErrorCode::DepthBudget:
    case ErrorCode::ScaleNotFound:
    case ErrorCode::WindowExhausted:
      return 4;
    default:
      return 1;
  }
}

Error::Error(ErrorCode code, const std::string& message, long long detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + message),
      code_(code),
      detail_(detail) {}

// ---------------------------------------------------------- combinatorics

void Combinatorics::reindex() {
  int n = d();
  top_pos_.assign(n, 0);
  bottom_pos_.assign(n, 0);
  for (int p = 0; p < n; ++p) {
    top_pos_[top_[p]] = p;
    bottom_pos_[bottom_[p]] = p;
  }
}

void Combinatorics::top_wins() {
  int winner = top_.back();
  int loser = bottom_.back();
  bottom_.pop_back();
  bottom_.insert(bottom_.begin() + bottom_pos_[winner] + 1, loser);
  reindex();
}

void Combinatorics::bottom_wins() {
  int winner = bottom_.back();
  int loser = top_.back();
  top_.pop_back();
  top_.insert(top_.begin() + top_pos_[winner] + 1, loser);
  reindex();
}

Combinatorics validate_combinatorics(std::span<const int> top, std::span<const int> bottom) {
  const int d = static_cast<int>(top.size());
  if (d < 2 || bottom.size() != top.size())
    throw Error(ErrorCode::NotAPermutation, "rows must have equal length d >= 2");
  for (auto row : {top, bottom}) {
    std::vector<char> seen(d, 0);
    for (int label : row) {
      if (label < 0 || label >= d || seen[label])
        throw Error(ErrorCode::NotAPermutation, "row is not a permutation of the labels");
      seen[label] = 1;
    }
  }
  std::vector<int> balance(d, 0);
  int unbalanced = 0;
  auto bump = [&](int label, int delta) {
    if (balance[label] == 0) ++unbalanced;
    balance[label] += delta;
    if (balance[label] == 0) --unbalanced;
  };
  for (int k = 1; k < d; ++k) {
    bump(top[k - 1], +1);
    bump(bottom[k - 1], -1);
    if (unbalanced == 0)
      throw Error(ErrorCode::Reducible, "prefix of length " + std::to_string(k) + " is invariant", k);
  }
  Combinatorics pi;
  pi.top_.assign(top.begin(), top.end());
  pi.bottom_.assign(bottom.begin(), bottom.end());
  pi.reindex();
  return pi;
}

Combinatorics validate_combinatorics_one_based(std::span<const int> top,
                                               std::span<const int> bottom) {
  std::vector<int> t(top.begin(), top.end()), b(bottom.begin(), bottom.end());
  for (int& v : t) --v;
  for (int& v : b) --v;
  return validate_combinatorics(t, b);
}

SingularityStructure singularity_structure(const Combinatorics& pi) {
  const int d = pi.d();
  std::vector<int> parent(d + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  auto left_end = [&](int label) { return pi.top_position(label); };
  auto right_end = [&](int label) { return pi.top_position(label) + 1; };

  unite(0, left_end(pi.bottom(0)));
  for (int j = 1; j < d; ++j) unite(left_end(pi.bottom(j)), right_end(pi.bottom(j - 1)));
  unite(d, right_end(pi.bottom(d - 1)));

  SingularityStructure out;
  out.assignment.assign(d + 1, -1);
  std::vector<int> class_of_root(d + 1, -1);
  for (int i = 0; i <= d; ++i) {
    int r = find(i);
    if (class_of_root[r] < 0) class_of_root[r] = out.kappa++;
    out.assignment[i] = class_of_root[r];
  }
  out.genus = (d + 1 - out.kappa) / 2;
  return out;
}

}  // namespace gietlab
