#pragma once

#include "gietlab/birkhoff.hpp"
#include "gietlab/fit.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gietlab {

// Monotone piecewise linear map through (xs[i], ys[i]).
template <class Scalar>
struct PiecewiseLinear {
  std::vector<Scalar> xs, ys;

  Scalar operator()(const Scalar& x) const;
  Scalar inverse(const Scalar& y) const;
  // Symmetric difference quotient at breakpoint i (one-sided at the ends).
  Scalar slope_at(std::size_t i) const;
};

// h_k sending the floor endpoints of P_k(T) to those of P_k(T0) in order.
// Throws PartitionMismatch when the two chains or floor sequences differ.
template <class Scalar>
PiecewiseLinear<Scalar> numeric_conjugacy(const InductionChain<Scalar>& chain,
                                          const InductionChain<Scalar>& model, int k,
                                          long long floor_cap = kDefaultFloorCap);

template <class Scalar>
PiecewiseLinear<Scalar> numeric_conjugacy(const Giet<Scalar>& T, const Giet<Scalar>& T0, int k,
                                          Acceleration kind = Acceleration::Positive,
                                          long long floor_cap = kDefaultFloorCap);

// max over an interior grid of |h(T x) - T0(h x)|.
template <class Scalar>
Scalar conjugacy_residual(const Giet<Scalar>& T, const Giet<Scalar>& T0,
                          const PiecewiseLinear<Scalar>& h, int grid = 1000);

template <class Scalar>
struct LogSlopeSample {
  Scalar x;
  // -log Dh at x, which solves phi o T - phi = log DT up to a constant.
  Scalar phi;
};

// Breakpoints of the coarse map where the difference quotients of two
// successive conjugacy levels agree within `threshold`.
template <class Scalar>
std::vector<LogSlopeSample<Scalar>> stable_log_derivative(const PiecewiseLinear<Scalar>& coarse,
                                                          const PiecewiseLinear<Scalar>& fine,
                                                          const Scalar& threshold);

// Phi(t) = S_t f(0) along the orbit z_t = T^t(0), summed over full towers.
template <class Scalar>
Scalar orbit_sum(const SpecialSums<Scalar>& sums, long long t);

template <class Scalar>
struct OrbitPoint {
  long long index = 0;
  Scalar point;
  // Floor of z_index at the level this point approximates.
  FloorAddress floor;
};

template <class Scalar>
struct ApproximationCertificate {
  Scalar x, y;
  int k0 = 0;
  int depth = 0;
  long long p0 = 0;
  // Floors of x and y at levels 0..depth.
  std::vector<FloorAddress> x_floors, y_floors;
  // Approximants at levels k0..depth.
  std::vector<OrbitPoint<Scalar>> xs, ys;
  // Visits to I_{k0-1} between x_{k0} and y_{k0}, and its bound.
  long long bridge_count = 0;
  BigInt bridge_bound;
  // Visits to I_k between consecutive approximants, k = k0..depth-1.
  std::vector<long long> x_counts, y_counts;
  std::vector<BigInt> step_bounds;
};

// Approximates x and y by points of the orbit of 0 level by level. x and y
// must share their level-(k0-1) floor, k0 being the first level where they
// separate. Each search runs over the window 2 max_l q_{k+2}^l and throws
// WindowExhausted if it fails.
template <class Scalar>
ApproximationCertificate<Scalar> single_orbit_approximation(const TowerHierarchy<Scalar>& hierarchy,
                                                            const Scalar& x, const Scalar& y,
                                                            int depth);

struct CertificateAudit {
  bool passed = true;
  // Recounted visits above the proven bound.
  long long bound_violations = 0;
  // Recounts or floor memberships that disagree with the certificate.
  long long mismatches = 0;
  std::vector<std::string> notes;
};

// Checks certificates against the raw orbit of 0 and flat partitions built
// by forward iteration, without using the tower hierarchy.
template <class Scalar>
class CertificateVerifier {
 public:
  explicit CertificateVerifier(const InductionChain<Scalar>& chain,
                               long long floor_cap = kDefaultFloorCap);
  CertificateAudit audit(const ApproximationCertificate<Scalar>& certificate);

 private:
  const Scalar& orbit(long long t);
  const DynamicalPartition<Scalar>& partition(int k);
  FloorAddress floor_of(int k, const Scalar& x, bool left_closed);
  long long visits(int k, long long from, long long to);

  const InductionChain<Scalar>* chain_;
  long long floor_cap_;
  std::vector<Scalar> orbit_;
  std::map<int, DynamicalPartition<Scalar>> partitions_;
};

template <class Scalar>
struct OrbitVariation {
  Scalar value;  // S_{q-p} f(z_p)
  Scalar bound;  // N_k(p, q) ||f_k|| + R_k^j
  long long crossings = 0;
  int tower = 0;
  Scalar special_norm, broken_sup;
};

// Throws NotSameFloor unless z_p and z_q share a floor of P_k.
template <class Scalar>
OrbitVariation<Scalar> orbit_variation_bound(const SpecialSums<Scalar>& sums, long long p,
                                             long long q, int k);

template <class Scalar>
struct SamplePair {
  Scalar x, y;
};

template <class Scalar>
struct PairVariation {
  Scalar x, y;
  int k0 = -1;
  Covering covering = Covering::OneFloor;
  Scalar dx, dphi;
  // Empty when the pair was used; otherwise why it was skipped.
  std::string skipped;
};

// phi(y) - phi(x) through single orbit approximations refined `refinement`
// levels past the scale of the pair.
template <class Scalar>
PairVariation<Scalar> pair_variation(const SpecialSums<Scalar>& sums, const Scalar& x,
                                     const Scalar& y, int refinement = 3);

struct HolderOptions {
  // Levels of refinement past the scale of each pair.
  int refinement = 3;
  // Largest level used; pairs needing more are skipped. Negative means the
  // hierarchy depth minus one.
  int depth = -1;
  int workers = 1;
  // Levels with fewer usable pairs are left out of the fits.
  int min_pairs_per_level = 8;
  // Renormalization steps used to fit d_C2(R^m T, I_d) <= C(T) rho^m.
  int decay_levels = 8;
};

struct LengthBoundCheck {
  int level;
  double min_floor;
  double bound;  // 1 / (d ||Q(0, k)||)
};

template <class Scalar>
struct RegularityReport {
  double lambda1 = 0, lambda2 = 0;
  std::optional<double> alpha;
  double length_constant = 0;     // c in |x - y| >= c lambda1^k0
  double variation_constant = 0;  // C in |dphi| <= C lambda2^k0
  double holder_constant = 0;     // max |dphi| / |x - y|^alpha
  double decay_constant = 0;      // C(T)
  double decay_rate = 0;          // rho
  double quantitative_distance = 0;
  bool affine_degenerate = false;
  bool lambda_order_violation = false;
  bool insufficient_decay = false;
  bool insufficient_levels = false;
  std::vector<PairVariation<Scalar>> per_pair;
  std::vector<LengthBoundCheck> length_bounds;
};

// Fits lambda1, lambda2 and alpha over the pairs. `chain` belongs to T and
// `model` to T0; both must follow the same combinatorial path.
template <class Scalar>
RegularityReport<Scalar> holder_fit(const SpecialSums<Scalar>& sums,
                                    const InductionChain<Scalar>& model,
                                    const std::vector<SamplePair<Scalar>>& pairs,
                                    const HolderOptions& options = {});

}  // namespace gietlab
