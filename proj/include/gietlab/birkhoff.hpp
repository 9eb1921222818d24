#pragma once

#include "gietlab/towers.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace gietlab {

// Function on [0, L] given branchwise: (label, x) with x in the closure of
// the top interval `label`.
template <class Scalar>
class Observable {
 public:
  using Function = std::function<Scalar(int, const Scalar&)>;

  Observable() = default;
  explicit Observable(Function f) : f_(std::move(f)) {}

  // f = log DT. Special sums of this observable are log DT_k.
  static Observable log_derivative(const Giet<Scalar>& T);

  Scalar operator()(int label, const Scalar& x) const { return f_(label, x); }
  bool is_log_derivative() const { return log_derivative_; }

 private:
  Function f_;
  bool log_derivative_ = false;
};

// S_n f(x) by iteration: sum of f(T^i x) over 0 <= i < n for n > 0, sum of
// f(T^{-i} x) over 1 <= i <= -n for n < 0, zero for n = 0. With this sign
// choice S_{-m} f(T^m x) = S_m f(x).
template <class Scalar>
Scalar birkhoff_sum(const Giet<Scalar>& T, const Observable<Scalar>& f, const Scalar& x,
                    long long n);

// f_k on the level-k bases, together with partial tower sums.
template <class Scalar>
class SpecialSums {
 public:
  // With `closed_form`, the special sums of log DT are read off the induced
  // branches; otherwise every level is built from the one below.
  SpecialSums(const TowerHierarchy<Scalar>& hierarchy, Observable<Scalar> f,
              bool closed_form = true);

  const TowerHierarchy<Scalar>& hierarchy() const { return *hierarchy_; }
  const Observable<Scalar>& observable() const { return f_; }

  // f_k(x) for x in the closure of I_k^j.
  Scalar operator()(int k, int j, const Scalar& x) const;
  // f_k(x) as the sum of level k-1 special sums along the itinerary of j.
  Scalar from_level_below(int k, int j, const Scalar& x) const;
  // S_m f(x) for x in the closure of I_k^j and 0 <= m <= q_k^j.
  Scalar partial(int k, int j, const Scalar& x, long long m) const;

  // max |f_k| over a uniform grid of `grid` points in each base.
  Scalar sup_norm(int k, int grid = 65) const;
  Scalar tower_sup_norm(int k, int j, int grid = 65) const;
  // Sampled sup of |broken sums| on tower j with default sampling, cached.
  Scalar broken_abs_sup(int k, int j) const;

 private:
  const TowerHierarchy<Scalar>* hierarchy_;
  Observable<Scalar> f_;
  bool closed_form_;
  mutable std::map<std::pair<int, int>, Scalar> sup_cache_;
  mutable std::map<std::pair<int, int>, Scalar> broken_cache_;
  std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
};

// Summary of f_k with its sampled sup norm.
template <class Scalar>
struct SpecialSumTable {
  int level;
  std::vector<Scalar> tower_sup;
  Scalar sup_norm;
};

template <class Scalar>
SpecialSumTable<Scalar> special_sums(const SpecialSums<Scalar>& sums, int k, int grid = 65);

template <class Scalar>
struct DecompositionTerm {
  int level;
  int label;
  Scalar point;
  Scalar value;
  bool backward;
};

template <class Scalar>
struct GeometricDecomposition {
  // Deepest level whose inducing interval meets the orbit segment twice.
  int deepest_level = 0;
  // Time of the splitting point x_0 = T^{split_time} x.
  long long split_time = 0;
  std::vector<DecompositionTerm<Scalar>> terms;
  std::vector<long long> forward_counts, backward_counts;
  Scalar total;
  // 2 sum_n ||A_n|| ||f_n|| over the levels used.
  Scalar bound;
};

// Writes S_r f(x) as a sum of special sums, descending greedily from the
// deepest level on both sides of the splitting point.
template <class Scalar>
GeometricDecomposition<Scalar> geometric_decomposition(const SpecialSums<Scalar>& sums,
                                                       const Scalar& x, long long r);

// Break conventions: Concatenation gives B(x, x, m) = f_k(x); AsDefined and
// AsSupremum reproduce the two raw index choices.
enum class BrokenConvention { Concatenation, AsDefined, AsSupremum };

template <class Scalar>
struct BrokenSumSpec {
  int level;
  int tower;
  Scalar x, y;
  long long break_height;
};

template <class Scalar>
Scalar broken_sum(const SpecialSums<Scalar>& sums, const BrokenSumSpec<Scalar>& spec,
                  BrokenConvention convention = BrokenConvention::Concatenation);

struct BrokenSampling {
  long long max_breaks = 512;
};

template <class Scalar>
struct BrokenSupEstimate {
  Scalar sup, inf, abs_sup;
  // max over the sampled base points z of |sup - f_k(z)|.
  Scalar gap;
  long long breaks_sampled = 0;
};

// Sampled supremum of broken sums over break heights and base points near
// the endpoints and at the midpoint of I_k^j.
template <class Scalar>
BrokenSupEstimate<Scalar> broken_sup_estimate(const SpecialSums<Scalar>& sums, int k, int j,
                                              const BrokenSampling& sampling = {});

}  // namespace gietlab
