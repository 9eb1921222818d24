#pragma once

#include "gietlab/combinatorics.hpp"
#include "gietlab/diffeo.hpp"
#include "gietlab/scalar.hpp"

#include <vector>

namespace gietlab {

template <class Scalar>
struct Interval {
  Scalar left, right;
  Scalar length() const { return right - left; }
  Scalar midpoint() const { return (left + right) / 2; }
};

enum class Direction { Forward, Inverse };
enum class Winner { Top, Bottom };

struct RauzyMove {
  Winner side;
  int winner;
  int loser;
};

// Generalized interval exchange on [0, L]. Intervals and branches are stored
// per label in absolute coordinates; each branch is defined on the closure
// of its top interval and maps it onto the closure of its bottom interval.
template <class Scalar>
class Giet {
 public:
  // Top and bottom intervals by label; both rows must tile [0, L] in the
  // orders given by `pi`.
  Giet(Combinatorics pi, std::vector<Interval<Scalar>> top, std::vector<Interval<Scalar>> bottom,
       std::vector<Chain<Scalar>> branches, int precision_bits);
  Giet() = default;

  // Builds T from shape-profile coordinates: top lengths, log-slopes and
  // one normalized profile diffeo of [0,1] per label.
  static Giet from_shape_profile(Combinatorics pi, const Vector<Scalar>& lambda_top,
                                 const Vector<Scalar>& log_slopes,
                                 std::vector<Chain<Scalar>> profiles, int precision_bits);

  int d() const { return pi_.d(); }
  const Combinatorics& combinatorics() const { return pi_; }
  const Scalar& length() const { return length_; }
  int precision_bits() const { return bits_; }
  const Scalar& tolerance() const { return tol_; }

  const Interval<Scalar>& top_interval(int label) const { return top_[label]; }
  const Interval<Scalar>& bottom_interval(int label) const { return bottom_[label]; }
  const Chain<Scalar>& branch(int label) const { return branch_[label]; }

  // Label of the top (bottom) interval containing x. Throws AtSingularity
  // when x is within tolerance of an interior endpoint.
  int top_label_at(const Scalar& x) const;
  int bottom_label_at(const Scalar& x) const;
  // Endpoint u_i (v_i) of the top (bottom) partition, i = 0..d.
  const Scalar& top_endpoint(int i) const { return top_cuts_[i]; }
  const Scalar& bottom_endpoint(int i) const { return bottom_cuts_[i]; }

  // Shape-profile coordinates.
  Vector<Scalar> lambda_top() const;
  Vector<Scalar> rho() const;
  Vector<Scalar> log_slopes() const;
  // Branch rescaled to a diffeo of [0,1].
  Chain<Scalar> profile(int label) const;
  bool is_affine() const;
  bool is_standard() const;

  // Which of the last top and last bottom intervals is longer. Throws
  // NumericalConnection when they agree within tolerance.
  Winner peek_winner() const;
  // One Rauzy-Veech step in place: the map becomes its first return to
  // [0, L - shortest last interval].
  RauzyMove rauzy_veech_in_place();

 private:
  void refresh_cuts();
  int locate(const std::vector<Scalar>& cuts, const std::vector<int>& order, const Scalar& x) const;

  Combinatorics pi_;
  Scalar length_;
  std::vector<Interval<Scalar>> top_, bottom_;
  std::vector<Chain<Scalar>> branch_;
  int bits_ = kDefaultPrecisionBits;
  Scalar tol_;
  std::vector<Scalar> top_cuts_, bottom_cuts_;
};

// Standard IET on [0, sum lambda] with translation branches.
template <class Scalar>
Giet<Scalar> make_standard_iet(const Combinatorics& pi, const Vector<Scalar>& lambda,
                               int precision_bits = kDefaultPrecisionBits);

template <class Scalar>
Scalar apply(const Giet<Scalar>& T, const Scalar& x, Direction direction = Direction::Forward);

// D^2 T / DT at x.
template <class Scalar>
Scalar nonlinearity(const Giet<Scalar>& T, const Scalar& x);

// Integral of the nonlinearity of `f` over [lo, hi], signed or absolute,
// by adaptive Gauss-Kronrod quadrature.
template <class Scalar>
Scalar integrated_nonlinearity(const Chain<Scalar>& f, const Scalar& lo, const Scalar& hi,
                               bool absolute);

template <class Scalar>
Scalar total_nonlinearity(const Giet<Scalar>& T);

// One entry per singularity class: sum of the jumps of log DT at the top
// endpoints of that class, with f^l(u_0) = f^r(u_d) = 0.
template <class Scalar>
Vector<Scalar> boundary(const Giet<Scalar>& T);

// C^2 norm of (f - g) on [0,1] estimated on a refining uniform grid.
template <class Scalar>
Scalar c2_grid_distance(const Chain<Scalar>& f, const Chain<Scalar>& g);

template <class Scalar>
Scalar c2_distance(const Giet<Scalar>& T1, const Giet<Scalar>& T2);

template <class Scalar>
Scalar c2_distance_to_iets(const Giet<Scalar>& T);

// h ∘ T0 ∘ h^{-1} for a standard IET T0 on [0,1]. Throws NotADiffeo if h
// does not fix the endpoints or DT is not positive on the check grid.
template <class Scalar>
Giet<Scalar> conjugate_by_diffeo(const Giet<Scalar>& T0, const Chain<Scalar>& h);

// Linear conjugate of T acting on [0, new_length].
template <class Scalar>
Giet<Scalar> rescaled(const Giet<Scalar>& T, const Scalar& new_length);

struct KeaneReport {
  bool survived = false;
  long steps_completed = 0;
  // 1-based step at which a near-connection was detected, or -1.
  long near_connection_step = -1;
};

template <class Scalar>
KeaneReport keane_probe(const Giet<Scalar>& T, long steps);

}  // namespace gietlab
