#include "gietlab/diffeo.hpp"

#include <array>
#include <cmath>

namespace gietlab {
namespace {

// Recent forward evaluations of sine nodes. Orbit iteration alternates
// h(w) and h^{-1}(h(w)); the lookup turns the inverse into a copy.
template <class S>
struct SineMemo {
  struct Entry {
    bool used = false;
    int frequency = 0;
    S amplitude, input, output;
  };
  std::array<Entry, 8> entries;
  int next = 0;

  void store(const S& a, int n, const S& in, const S& out) {
    Entry& e = entries[next];
    next = (next + 1) % static_cast<int>(entries.size());
    e.used = true;
    e.frequency = n;
    e.amplitude = a;
    e.input = in;
    e.output = out;
  }
  const S* find(const S& a, int n, const S& out) const {
    for (const Entry& e : entries)
      if (e.used && e.frequency == n && e.output == out && e.amplitude == a) return &e.input;
    return nullptr;
  }
};

template <class S>
SineMemo<S>& sine_memo() {
  thread_local SineMemo<S> memo;
  return memo;
}

template <class S>
S angular(int n) {
  return 2 * pi_constant<S>() * n;
}

template <class S>
S sine_forward(const S& a, int n, const S& x, S* slope) {
  using std::sin;
  S w = angular<S>(n);
  S s, c;
  ScalarTraits<S>::sin_cos(w * x, s, c);
  S out = x + a / w * s;
  sine_memo<S>().store(a, n, x, out);
  if (slope) *slope = 1 + a * c;
  return out;
}

template <class S>
S sine_inverse(const S& a, int n, const S& x) {
  using std::abs;
  using std::sqrt;
  if (const S* hit = sine_memo<S>().find(a, n, x)) return *hit;
  const double ad = to_double(a), xd = to_double(x);
  const double wd = 2 * std::acos(-1.0) * n;
  double yd = xd;
  for (int i = 0; i < 100; ++i) {
    double dy = (yd + ad / wd * std::sin(wd * yd) - xd) / (1 + ad * std::cos(wd * yd));
    yd -= dy;
    if (std::abs(dy) < 1e-16) break;
  }
  S y = S(yd);
  const S w = angular<S>(n);
  const S eps = ScalarTraits<S>::unit_roundoff(x);
  const S threshold = sqrt(eps) / 1024;
  S s, c;
  for (int i = 0; i < 40; ++i) {
    ScalarTraits<S>::sin_cos(w * y, s, c);
    S dy = (y + a / w * s - x) / (1 + a * c);
    y -= dy;
    if (abs(dy) <= threshold) break;
  }
  return y;
}

template <class S>
S quadratic_inverse(const S& a, const S& x) {
  using std::sqrt;
  S one_plus = 1 + a;
  return 2 * x / (one_plus + sqrt(one_plus * one_plus - 4 * a * x));
}

template <class S>
Jet<S> invert_jet(const S& y, const S& h1, const S& h2, const S& h3) {
  S g1 = 1 / h1;
  S g1_2 = g1 * g1;
  S g1_3 = g1_2 * g1;
  return {y, g1, -h2 * g1_3, (3 * h2 * h2 - h1 * h3) * g1_3 * g1_2};
}

template <class S>
S snap_threshold(const S& x) {
  return ScalarTraits<S>::unit_roundoff(x) * 65536;
}

}  // namespace

// ------------------------------------------------------------------- Node

template <class S>
Node<S> Node<S>::affine(const S& slope, const S& offset) {
  Node n;
  n.kind = NodeKind::Affine;
  n.a = slope;
  n.b = offset;
  return n;
}

template <class S>
Node<S> Node<S>::sine(const S& amplitude, int frequency) {
  Node n;
  n.kind = NodeKind::Sine;
  n.a = amplitude;
  n.frequency = frequency;
  return n;
}

template <class S>
Node<S> Node<S>::quadratic(const S& coefficient) {
  Node n;
  n.kind = NodeKind::Quadratic;
  n.a = coefficient;
  return n;
}

template <class S>
Node<S> Node<S>::inverted() const {
  Node n = *this;
  if (kind == NodeKind::Affine) {
    n.a = 1 / a;
    n.b = -b / a;
  } else {
    n.inverse = !inverse;
  }
  return n;
}

template <class S>
S Node<S>::value(const S& x) const {
  switch (kind) {
    case NodeKind::Affine:
      return a * x + b;
    case NodeKind::Sine:
      return inverse ? sine_inverse(a, frequency, x) : sine_forward<S>(a, frequency, x, nullptr);
    case NodeKind::Quadratic:
      return inverse ? quadratic_inverse(a, x) : S(x + a * x * (1 - x));
  }
  return x;
}

template <class S>
S Node<S>::slope(const S& x) const {
  using std::cos;
  switch (kind) {
    case NodeKind::Affine:
      return a;
    case NodeKind::Sine: {
      S y = inverse ? sine_inverse(a, frequency, x) : x;
      S d = 1 + a * cos(angular<S>(frequency) * y);
      return inverse ? S(1 / d) : d;
    }
    case NodeKind::Quadratic: {
      S y = inverse ? quadratic_inverse(a, x) : x;
      S d = 1 + a * (1 - 2 * y);
      return inverse ? S(1 / d) : d;
    }
  }
  return S(1);
}

template <class S>
Jet<S> Node<S>::jet(const S& x) const {
  switch (kind) {
    case NodeKind::Affine:
      return {a * x + b, a, S(0), S(0)};
    case NodeKind::Sine: {
      S y = inverse ? sine_inverse(a, frequency, x) : x;
      S w = angular<S>(frequency);
      S s, c;
      ScalarTraits<S>::sin_cos(w * y, s, c);
      S h0 = y + a / w * s;
      S h1 = 1 + a * c;
      S h2 = -a * w * s;
      S h3 = -a * w * w * c;
      if (!inverse) {
        sine_memo<S>().store(a, frequency, y, h0);
        return {h0, h1, h2, h3};
      }
      return invert_jet(y, h1, h2, h3);
    }
    case NodeKind::Quadratic: {
      S y = inverse ? quadratic_inverse(a, x) : x;
      S h1 = 1 + a * (1 - 2 * y);
      S h2 = -2 * a;
      if (!inverse) return {y + a * y * (1 - y), h1, h2, S(0)};
      return invert_jet(y, h1, h2, S(0));
    }
  }
  return {x, S(1), S(0), S(0)};
}

template <class S>
bool Node<S>::certified_monotone() const {
  using std::abs;
  if (kind == NodeKind::Affine) return a > 0;
  return abs(a) < 1 && frequency >= 1;
}

template <class S>
bool Node<S>::cancels(const Node& next) const {
  return kind != NodeKind::Affine && kind == next.kind && inverse != next.inverse &&
         frequency == next.frequency && a == next.a;
}

// ------------------------------------------------------------------ Chain

template <class S>
Chain<S>::Chain(const std::vector<Node<S>>& nodes) {
  for (const auto& n : nodes) push(n);
}

template <class S>
Chain<S> Chain<S>::affine(const S& slope, const S& offset) {
  Chain c;
  c.push(Node<S>::affine(slope, offset));
  return c;
}

template <class S>
Chain<S> Chain<S>::affine_between(const S& from_lo, const S& from_hi, const S& to_lo,
                                  const S& to_hi) {
  S slope = (to_hi - to_lo) / (from_hi - from_lo);
  return affine(slope, to_lo - slope * from_lo);
}

template <class S>
bool Chain<S>::is_affine() const {
  for (const auto& n : nodes_)
    if (n.kind != NodeKind::Affine) return false;
  return true;
}

template <class S>
void Chain<S>::push(const Node<S>& node) {
  using std::abs;
  if (node.kind == NodeKind::Affine) {
    Node<S> merged = node;
    if (!nodes_.empty() && nodes_.back().kind == NodeKind::Affine) {
      const Node<S>& inner = nodes_.back();
      merged.a = node.a * inner.a;
      merged.b = node.a * inner.b + node.b;
      nodes_.pop_back();
    }
    S snap = snap_threshold(merged.a);
    if (abs(merged.a - 1) <= snap && abs(merged.b) <= snap) return;
    nodes_.push_back(merged);
    return;
  }
  if (!nodes_.empty() && nodes_.back().cancels(node)) {
    nodes_.pop_back();
    return;
  }
  nodes_.push_back(node);
}

template <class S>
Chain<S> Chain<S>::then(const Chain& outer) const {
  Chain out = *this;
  for (const auto& n : outer.nodes_) out.push(n);
  return out;
}

template <class S>
Chain<S> Chain<S>::inverse() const {
  Chain out;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) out.push(it->inverted());
  return out;
}

template <class S>
S Chain<S>::value(const S& x) const {
  S v = x;
  for (const auto& n : nodes_) v = n.value(v);
  return v;
}

template <class S>
S Chain<S>::inverse_value(const S& x) const {
  S v = x;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) v = it->inverted().value(v);
  return v;
}

template <class S>
Jet<S> Chain<S>::jet(const S& x) const {
  Jet<S> j{x, S(1), S(0), S(0)};
  for (const auto& n : nodes_) {
    Jet<S> g = n.jet(j.value);
    S d1sq = j.d1 * j.d1;
    Jet<S> out;
    out.value = g.value;
    out.d3 = g.d3 * d1sq * j.d1 + 3 * g.d2 * j.d1 * j.d2 + g.d1 * j.d3;
    out.d2 = g.d2 * d1sq + g.d1 * j.d2;
    out.d1 = g.d1 * j.d1;
    j = std::move(out);
  }
  return j;
}

template <class S>
S Chain<S>::derivative(const S& x) const {
  S v = x;
  S d = S(1);
  for (const auto& n : nodes_) {
    d *= n.slope(v);
    v = n.value(v);
  }
  return d;
}

template <class S>
std::pair<S, S> Chain<S>::value_and_log_derivative(const S& x) const {
  using std::log;
  S v = x;
  S d = S(1);
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Sine && !n.inverse) {
      S slope;
      v = sine_forward<S>(n.a, n.frequency, v, &slope);
      d *= slope;
    } else {
      d *= n.slope(v);
      v = n.value(v);
    }
  }
  return {v, log(d)};
}

template <class S>
S Chain<S>::log_derivative(const S& x) const {
  return value_and_log_derivative(x).second;
}

template <class S>
Chain<S> sine_perturbation(const S& amplitude, int frequency) {
  return Chain<S>({Node<S>::sine(amplitude, frequency)});
}

template <class S>
Chain<S> quadratic_perturbation(const S& coefficient) {
  return Chain<S>({Node<S>::quadratic(coefficient)});
}

#define GIETLAB_INSTANTIATE(S)                                  \
  template struct Node<S>;                                      \
  template class Chain<S>;                                      \
  template Chain<S> sine_perturbation<S>(const S&, int);        \
  template Chain<S> quadratic_perturbation<S>(const S&);

GIETLAB_INSTANTIATE(double)
GIETLAB_INSTANTIATE(Real)

}  // namespace gietlab
