#pragma once

#include "gietlab/errors.hpp"
#include "gietlab/induction.hpp"

#include <functional>
#include <vector>

namespace gietlab {

struct FloorAddress {
  int level = 0;
  int tower = 0;
  long long height = 0;
  bool operator==(const FloorAddress&) const = default;
};

template <class Scalar>
struct Floor {
  Scalar left, right;
  int tower;
  long long height;
};

// Level-k Rohlin towers of the base map, floors sorted left to right.
template <class Scalar>
struct DynamicalPartition {
  int level = 0;
  std::vector<Interval<Scalar>> bases;
  std::vector<long long> heights;
  std::vector<Floor<Scalar>> floors;
  Scalar tolerance;

  std::vector<Scalar> endpoints() const;
};

inline constexpr long long kDefaultFloorCap = 200'000;

// Pushes each base interval forward with the base map until it returns to
// the inducing interval; heights are measured, not read off the cocycle.
template <class Scalar>
DynamicalPartition<Scalar> build_partition(const InductionChain<Scalar>& chain, int k,
                                           long long floor_cap = kDefaultFloorCap);

template <class Scalar>
FloorAddress locate(const DynamicalPartition<Scalar>& partition, const Scalar& x);

template <class Scalar>
Scalar mesh(const DynamicalPartition<Scalar>& partition);

// Navigates the nested towers of an induction chain without listing floors.
// Level k+1 towers are stacks of level k towers in the order given by the
// record itineraries, so orbit segments, floor endpoints and addresses are
// reached by descending through the levels.
template <class Scalar>
class TowerHierarchy {
 public:
  struct Address {
    int level;
    int tower;
    long long height;
    // Point of the base I_k^tower whose orbit reaches x after `height` steps.
    Scalar base;
    FloorAddress floor() const { return {level, tower, height}; }
  };
  // Called with (level, label, base point) for every full tower crossed.
  using Visitor = std::function<void(int, int, const Scalar&)>;

  // The chain must outlive the hierarchy. Levels whose heights overflow
  // 64-bit integers are not used.
  explicit TowerHierarchy(const InductionChain<Scalar>& chain);

  const InductionChain<Scalar>& chain() const { return *chain_; }
  int depth() const { return depth_; }
  const Giet<Scalar>& level(int k) const { return chain_->level(k); }
  const Scalar& tolerance() const { return chain_->base().tolerance(); }
  long long height(int k, int j) const { return heights_[k][j]; }
  long long max_height(int k) const;
  const std::vector<int>& itinerary(int k, int j) const {
    const auto& words = chain_->record(k).itineraries;
    if (words.empty()) throw Error(ErrorCode::DepthBudget, "itineraries of this level exceed the cap", k);
    return words[j];
  }
  // Number of level-k tower bases inside the level-K tower j (K >= k).
  long long towers_within(int K, int j, int k) const { return within_[K][k][j]; }

  // Branch j of the level-k induced map and its inverse.
  Scalar jump(int k, int j, const Scalar& x) const;
  Scalar jump_back(int k, int j, const Scalar& x) const;

  // T^m(x) for x in the closure of I_k^j and 0 <= m <= q_k^j.
  Scalar climb(int k, int j, const Scalar& x, long long m, const Visitor& visit = {}) const;

  Address address(const Scalar& x, int k) const;
  Address refine(const Address& a) const;
  Interval<Scalar> floor_interval(int k, int j, long long m) const;

  // Orbit z_n = T^n(0).
  Address orbit_address(long long n, int k) const;
  Scalar orbit_point(long long n) const;
  // z_t, visiting the full towers that make up z_0 .. z_{t-1}.
  Scalar orbit_climb(long long t, const Visitor& visit) const;
  // #{l < t : z_l in I_k}.
  long long visits_before(int k, long long t) const;

 private:
  struct Piece {
    Scalar left, right;
    int tower;  // level k+1 tower
    int slot;   // position in that tower's itinerary
    long long offset;
  };
  int orbit_level(long long n, int at_least) const;

  const InductionChain<Scalar>* chain_;
  int depth_;
  std::vector<std::vector<long long>> heights_;
  std::vector<std::vector<std::vector<long long>>> within_;
  std::vector<std::vector<Piece>> pieces_;
};

enum class Covering { OneFloor, TwoAdjacentFloors };

template <class Scalar>
struct PairScale {
  int k0;
  Covering covering;
  // Shared endpoint of the two level k0-1 floors when they differ.
  Scalar shared_endpoint;
  FloorAddress x_floor, y_floor;  // at level k0 - 1 (level 0 when k0 = 0)
};

// Smallest k such that [x, y] contains a full floor of P_k.
template <class Scalar>
PairScale<Scalar> scale_of_pair(const TowerHierarchy<Scalar>& hierarchy, const Scalar& x,
                                const Scalar& y);

}  // namespace gietlab
