#pragma once

#include <span>
#include <vector>

namespace gietlab {

// Pair of orders (top, bottom) of d labelled intervals. Labels are 0..d-1;
// positions are 0..d-1 from left to right.
class Combinatorics {
 public:
  Combinatorics() = default;

  int d() const { return static_cast<int>(top_.size()); }
  int top(int position) const { return top_[position]; }
  int bottom(int position) const { return bottom_[position]; }
  int top_position(int label) const { return top_pos_[label]; }
  int bottom_position(int label) const { return bottom_pos_[label]; }
  const std::vector<int>& top_order() const { return top_; }
  const std::vector<int>& bottom_order() const { return bottom_; }

  // Rauzy moves. Top win: the last bottom label moves right after the last
  // top label in the bottom row. Bottom win: symmetric on the top row.
  void top_wins();
  void bottom_wins();

  bool operator==(const Combinatorics& other) const {
    return top_ == other.top_ && bottom_ == other.bottom_;
  }

 private:
  friend Combinatorics validate_combinatorics(std::span<const int>, std::span<const int>);
  void reindex();

  std::vector<int> top_, bottom_, top_pos_, bottom_pos_;
};

// Checks that both rows are permutations of 0..d-1 (d >= 2) and that no
// proper prefix of the top row has the same label set as the bottom prefix.
// Throws NotAPermutation or Reducible(k) with k the prefix length.
Combinatorics validate_combinatorics(std::span<const int> top, std::span<const int> bottom);

// Same with labels 1..d, as used in files and on the command line.
Combinatorics validate_combinatorics_one_based(std::span<const int> top,
                                               std::span<const int> bottom);

struct SingularityStructure {
  int genus = 0;
  int kappa = 0;
  // Class index in 0..kappa-1 of each top endpoint u_0..u_d.
  std::vector<int> assignment;
};

// Endpoints u_0..u_d are glued by the identifications induced by the bottom
// row: around an interior bottom endpoint v_j the right end of the interval
// to its left meets the left end of the interval to its right; v_0 attaches
// to u_0 and v_d to u_d. Classes are the connected components.
SingularityStructure singularity_structure(const Combinatorics& pi);

}  // namespace gietlab
