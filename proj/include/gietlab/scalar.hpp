#pragma once

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <string>

namespace gietlab {

namespace mp = boost::multiprecision;

// Binary floating point with run-time precision (MPFR).
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

// Exact integers for incidence matrices and tower heights.
using BigInt = mp::number<mp::gmp_int, mp::et_off>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using IntegerMatrix = Eigen::Matrix<BigInt, Eigen::Dynamic, Eigen::Dynamic>;
using IntegerVector = Eigen::Matrix<BigInt, Eigen::Dynamic, 1>;

inline constexpr int kDefaultPrecisionBits = 256;

// Decimal digits requested from MPFR so that at least `bits` binary digits
// are carried.
int digits10_for_bits(int bits);

// Sets the default precision of Real values created on this thread and
// restores the previous setting on destruction.
class PrecisionScope {
 public:
  explicit PrecisionScope(int bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned previous_;
};

template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static int working_bits(int /*requested*/) { return 53; }
  // Unit roundoff of the value's representation.
  static double unit_roundoff(const double&) { return std::numeric_limits<double>::epsilon(); }
  static double from_string(const std::string& s);
  static std::string to_string(const double& x);
  static double to_double(const double& x) { return x; }
  static void sin_cos(const double& x, double& s, double& c) {
    s = std::sin(x);
    c = std::cos(x);
  }
};

template <>
struct ScalarTraits<Real> {
  static int working_bits(int requested) { return requested; }
  static Real unit_roundoff(const Real& x);
  static Real from_string(const std::string& s);
  static std::string to_string(const Real& x);
  static double to_double(const Real& x) { return x.convert_to<double>(); }
  static void sin_cos(const Real& x, Real& s, Real& c);
};

// Tolerance 2^(-bits/2) used for ties, singularities and boundaries.
template <class Scalar>
Scalar tolerance_for_bits(int bits) {
  using std::ldexp;
  return ldexp(Scalar(1), -ScalarTraits<Scalar>::working_bits(bits) / 2);
}

// pi at the current working precision, cached per precision.
template <class Scalar>
const Scalar& pi_constant();

template <class Scalar>
Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

template <class Scalar>
double to_double(const Scalar& x) {
  return ScalarTraits<Scalar>::to_double(x);
}

template <class Scalar>
std::string to_decimal(const Scalar& x) {
  return ScalarTraits<Scalar>::to_string(x);
}

template <class Scalar>
Scalar from_decimal(const std::string& s) {
  return ScalarTraits<Scalar>::from_string(s);
}

// Clamped conversion of an exact integer to int64; returns false on overflow.
bool fits_int64(const BigInt& v);
long long to_int64(const BigInt& v);

}  // namespace gietlab
