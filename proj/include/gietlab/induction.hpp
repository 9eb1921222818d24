#pragma once

#include "gietlab/giet.hpp"

#include <vector>

namespace gietlab {

enum class Acceleration { RauzyVeech, Zorich, Positive };

struct AccelerationOptions {
  // Number of consecutive strictly positive blocks per positive step.
  int positive_blocks = 2;
  // Elementary steps allowed in one Zorich run.
  long run_cap = 1'000'000;
  // Zorich runs allowed while waiting for one positive block.
  long positivity_cap = 100'000;
  // Total itinerary length kept for one step; past it the itineraries of
  // that step are dropped and only the matrices remain.
  long long itinerary_cap = 1LL << 25;
};

template <class Scalar>
struct RvStep {
  Giet<Scalar> induced;
  IntegerMatrix matrix;
  Winner winner;
};

// One Rauzy-Veech step. The elementary matrix E has E(loser, winner) = 1
// off the diagonal; rows index towers after the step, columns before it.
template <class Scalar>
RvStep<Scalar> rv_step(const Giet<Scalar>& T);

// One acceleration step taking level k to level k + 1.
template <class Scalar>
struct InductionRecord {
  int index = 0;
  // A_k: entry (i, j) counts passages of level-k tower j inside level-(k+1)
  // tower i, so q_{k+1} = A_k q_k.
  IntegerMatrix matrix;
  long rv_steps = 0;
  long zorich_runs = 0;
  // Elementary step counts (from the start of this record) closing each
  // positive block; empty for plain Zorich records.
  std::vector<long> block_ends;
  std::vector<Winner> winners;
  // itineraries[i]: level-k labels visited, bottom to top, by level-(k+1)
  // tower i before it returns. Empty when the itinerary cap was hit.
  std::vector<std::vector<int>> itineraries;
  // First return map to [0, lambda], not renormalized.
  Giet<Scalar> induced;
};

template <class Scalar>
InductionRecord<Scalar> zorich_step(const Giet<Scalar>& T, const AccelerationOptions& options = {});

template <class Scalar>
InductionRecord<Scalar> positive_accel_step(const Giet<Scalar>& T,
                                            const AccelerationOptions& options = {});

template <class Scalar>
InductionRecord<Scalar> rv_record(const Giet<Scalar>& T);

// Append-only sequence of acceleration steps over a base map.
template <class Scalar>
class InductionChain {
 public:
  explicit InductionChain(Giet<Scalar> base, Acceleration kind = Acceleration::Positive,
                          AccelerationOptions options = {});

  // Computes records until depth() >= depth.
  void extend_to(int depth);
  int depth() const { return static_cast<int>(records_.size()); }
  Acceleration acceleration() const { return kind_; }

  const Giet<Scalar>& base() const { return base_; }
  // Induced map at level k (level 0 is the base).
  const Giet<Scalar>& level(int k) const;
  const InductionRecord<Scalar>& record(int k) const;
  const IntegerMatrix& matrix(int k) const { return record(k).matrix; }
  // Heights q_k = Q(0, k) 1.
  const IntegerVector& heights(int k) const;
  // Length of the inducing interval at level k.
  const Scalar& inducing_length(int k) const { return level(k).length(); }
  // Elementary steps consumed up to level k.
  long rv_time(int k) const;

 private:
  Giet<Scalar> base_;
  Acceleration kind_;
  AccelerationOptions options_;
  std::vector<InductionRecord<Scalar>> records_;
  std::vector<IntegerVector> heights_;
  std::vector<long> times_;
};

// Q(m, n) = A_{n-1} ... A_m; identity when m == n.
template <class Scalar>
IntegerMatrix cocycle_product(const InductionChain<Scalar>& chain, int m, int n);

// Level-k induced map rescaled to [0,1].
template <class Scalar>
Giet<Scalar> renormalized_map(const InductionChain<Scalar>& chain, int k);

template <class Scalar>
Giet<Scalar> renormalized_map(const Giet<Scalar>& T, int k,
                              Acceleration kind = Acceleration::Positive,
                              const AccelerationOptions& options = {});

// Entrywise absolute sum.
BigInt matrix_norm(const IntegerMatrix& A);
bool is_positive(const IntegerMatrix& A);
IntegerMatrix elementary_matrix(int d, int winner, int loser);

}  // namespace gietlab
