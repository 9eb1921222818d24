#pragma once

#include "gietlab/scalar.hpp"

#include <utility>
#include <vector>

namespace gietlab {

// Value and first three derivatives of a map at a point.
template <class Scalar>
struct Jet {
  Scalar value, d1, d2, d3;
};

enum class NodeKind {
  Affine,     // x -> a x + b
  Sine,       // x -> x + a/(2 pi n) sin(2 pi n x), |a| < 1
  Quadratic,  // x -> x + a x (1 - x), |a| < 1
};

// One closed-form monotone map, optionally inverted.
template <class Scalar>
struct Node {
  NodeKind kind = NodeKind::Affine;
  Scalar a = Scalar(1);
  Scalar b = Scalar(0);
  int frequency = 1;
  bool inverse = false;

  static Node affine(const Scalar& slope, const Scalar& offset);
  static Node sine(const Scalar& amplitude, int frequency = 1);
  static Node quadratic(const Scalar& coefficient);

  Node inverted() const;
  Scalar value(const Scalar& x) const;
  Jet<Scalar> jet(const Scalar& x) const;
  // First derivative only.
  Scalar slope(const Scalar& x) const;
  // Positive derivative guaranteed by the parameter range.
  bool certified_monotone() const;
  // True when `next` undoes this node exactly.
  bool cancels(const Node& next) const;
};

// Composition of nodes, applied front to back. Adjacent affine nodes are
// merged, inverse pairs cancel and near-identity affine nodes are dropped.
template <class Scalar>
class Chain {
 public:
  Chain() = default;
  explicit Chain(const std::vector<Node<Scalar>>& nodes);

  static Chain identity() { return Chain(); }
  static Chain affine(const Scalar& slope, const Scalar& offset);
  // Increasing affine map sending [from_lo, from_hi] onto [to_lo, to_hi].
  static Chain affine_between(const Scalar& from_lo, const Scalar& from_hi, const Scalar& to_lo,
                              const Scalar& to_hi);

  const std::vector<Node<Scalar>>& nodes() const { return nodes_; }
  bool is_identity() const { return nodes_.empty(); }
  bool is_affine() const;

  // outer ∘ this.
  Chain then(const Chain& outer) const;
  Chain inverse() const;

  Scalar value(const Scalar& x) const;
  Scalar inverse_value(const Scalar& x) const;
  Jet<Scalar> jet(const Scalar& x) const;
  Scalar derivative(const Scalar& x) const;
  Scalar log_derivative(const Scalar& x) const;
  // (value, log of the derivative) in one pass.
  std::pair<Scalar, Scalar> value_and_log_derivative(const Scalar& x) const;

 private:
  void push(const Node<Scalar>& node);
  std::vector<Node<Scalar>> nodes_;
};

// Perturbations of the identity on [0,1] used as conjugacies and profiles.
template <class Scalar>
Chain<Scalar> sine_perturbation(const Scalar& amplitude, int frequency = 1);

template <class Scalar>
Chain<Scalar> quadratic_perturbation(const Scalar& coefficient);

// Composition g∘f, the usual reading order.
template <class Scalar>
Chain<Scalar> compose(const Chain<Scalar>& g, const Chain<Scalar>& f) {
  return f.then(g);
}

}  // namespace gietlab
