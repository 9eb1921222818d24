#include "gietlab/birkhoff.hpp"

#include "gietlab/errors.hpp"

#include <algorithm>
#include <memory>

namespace gietlab {

template <class S>
Observable<S> Observable<S>::log_derivative(const Giet<S>& T) {
  auto map = std::make_shared<const Giet<S>>(T);
  Observable f([map](int label, const S& x) { return map->branch(label).log_derivative(x); });
  f.log_derivative_ = true;
  return f;
}

template <class S>
S birkhoff_sum(const Giet<S>& T, const Observable<S>& f, const S& x, long long n) {
  S sum = S(0);
  S p = x;
  const long long steps = n < 0 ? -n : n;
  for (long long i = 0; i < steps; ++i) {
    int label;
    try {
      label = n > 0 ? T.top_label_at(p) : T.bottom_label_at(p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AtSingularity) throw;
      throw Error(ErrorCode::OrbitHitsSingularity, "orbit meets a discontinuity", i);
    }
    const Chain<S>& branch = T.branch(label);
    if (n > 0) {
      if (f.is_log_derivative()) {
        auto [v, ld] = branch.value_and_log_derivative(p);
        sum += ld;
        p = std::move(v);
      } else {
        sum += f(label, p);
        p = branch.value(p);
      }
    } else {
      p = branch.inverse_value(p);
      sum += f(label, p);
    }
  }
  return sum;
}

// ---------------------------------------------------------- special sums

template <class S>
SpecialSums<S>::SpecialSums(const TowerHierarchy<S>& hierarchy, Observable<S> f, bool closed_form)
    : hierarchy_(&hierarchy), f_(std::move(f)), closed_form_(closed_form) {}

template <class S>
S SpecialSums<S>::operator()(int k, int j, const S& x) const {
  if (k == 0) return f_(j, x);
  if (closed_form_ && f_.is_log_derivative())
    return hierarchy_->level(k).branch(j).log_derivative(x);
  return from_level_below(k, j, x);
}

template <class S>
S SpecialSums<S>::from_level_below(int k, int j, const S& x) const {
  if (k == 0) return f_(j, x);
  const auto& word = hierarchy_->itinerary(k - 1, j);
  S sum = S(0);
  S p = x;
  for (std::size_t t = 0; t < word.size(); ++t) {
    sum += (*this)(k - 1, word[t], p);
    if (t + 1 < word.size()) p = hierarchy_->jump(k - 1, word[t], p);
  }
  return sum;
}

template <class S>
S SpecialSums<S>::partial(int k, int j, const S& x, long long m) const {
  S sum = S(0);
  hierarchy_->climb(k, j, x, m, [&](int lev, int lab, const S& p) { sum += (*this)(lev, lab, p); });
  return sum;
}

template <class S>
S SpecialSums<S>::tower_sup_norm(int k, int j, int grid) const {
  using std::abs;
  auto key = std::make_pair(k * 64 + j, grid);
  {
    std::lock_guard lock(*cache_mutex_);
    if (auto it = sup_cache_.find(key); it != sup_cache_.end()) return it->second;
  }
  const auto& base = hierarchy_->level(k).top_interval(j);
  S best = S(0);
  for (int i = 0; i < grid; ++i) {
    S x = base.left + base.length() * S(i) / S(grid - 1);
    S v = abs((*this)(k, j, x));
    if (v > best) best = v;
  }
  std::lock_guard lock(*cache_mutex_);
  sup_cache_.emplace(key, best);
  return best;
}

template <class S>
S SpecialSums<S>::sup_norm(int k, int grid) const {
  S best = S(0);
  for (int j = 0; j < hierarchy_->level(k).d(); ++j) {
    S v = tower_sup_norm(k, j, grid);
    if (v > best) best = v;
  }
  return best;
}

template <class S>
SpecialSumTable<S> special_sums(const SpecialSums<S>& sums, int k, int grid) {
  SpecialSumTable<S> table{k, {}, S(0)};
  for (int j = 0; j < sums.hierarchy().level(k).d(); ++j) {
    table.tower_sup.push_back(sums.tower_sup_norm(k, j, grid));
    if (table.tower_sup.back() > table.sup_norm) table.sup_norm = table.tower_sup.back();
  }
  return table;
}

// ------------------------------------------------------ decomposition

namespace {

// First two visits of the orbit segment of x to I_n, from its level-n address.
template <class S>
struct Visits {
  long long first = 0, second = 0;
  S first_point;
};

template <class S>
Visits<S> visits(const TowerHierarchy<S>& H, const typename TowerHierarchy<S>::Address& a) {
  Visits<S> v;
  if (a.height == 0) {
    v.first = 0;
    v.first_point = a.base;
    v.second = H.height(a.level, a.tower);
  } else {
    v.first = H.height(a.level, a.tower) - a.height;
    v.first_point = H.jump(a.level, a.tower, a.base);
    int lab = H.level(a.level).top_label_at(v.first_point);
    v.second = v.first + H.height(a.level, lab);
  }
  return v;
}

}  // namespace

template <class S>
GeometricDecomposition<S> geometric_decomposition(const SpecialSums<S>& sums, const S& x,
                                                  long long r) {
  const TowerHierarchy<S>& H = sums.hierarchy();
  if (r < 0) throw Error(ErrorCode::InvalidArgument, "decomposition length must be nonnegative");
  GeometricDecomposition<S> out;
  out.total = S(0);
  out.bound = S(0);
  if (r == 0) return out;

  int start_level = 0;
  S x0 = x;
  long long i0 = 0;
  if (r >= 2) {
    auto a = H.address(x, 0);
    Visits<S> prev = visits(H, a);
    int n = 0;
    for (;;) {
      if (n + 1 >= H.depth())
        throw Error(ErrorCode::DepthBudget, "orbit segment needs deeper towers", n + 1);
      a = H.refine(a);
      Visits<S> next = visits(H, a);
      const bool twice = next.first < r && next.second < r;
      if (!twice) {
        out.deepest_level = n;
        if (next.first < r) {
          start_level = n + 1;
          x0 = next.first_point;
          i0 = next.first;
        } else {
          start_level = n;
          x0 = prev.first_point;
          i0 = prev.first;
        }
        break;
      }
      prev = next;
      ++n;
    }
  }

  auto count = [&](std::vector<long long>& counts, int level) {
    if (static_cast<int>(counts.size()) <= level) counts.resize(level + 1, 0);
    ++counts[level];
  };
  int max_level = out.deepest_level;

  long long R = r - i0;
  int lev = start_level;
  S p = x0;
  while (R > 0) {
    int lab = H.level(lev).top_label_at(p);
    long long q = H.height(lev, lab);
    if (q <= R) {
      S value = sums(lev, lab, p);
      out.total += value;
      out.terms.push_back({lev, lab, p, value, false});
      count(out.forward_counts, lev);
      max_level = std::max(max_level, lev);
      p = H.jump(lev, lab, p);
      R -= q;
    } else {
      --lev;
    }
  }

  R = i0;
  lev = start_level;
  p = x0;
  while (R > 0) {
    int lab = H.level(lev).bottom_label_at(p);
    long long q = H.height(lev, lab);
    if (q <= R) {
      S w = H.jump_back(lev, lab, p);
      S value = sums(lev, lab, w);
      out.total += value;
      out.terms.push_back({lev, lab, w, value, true});
      count(out.backward_counts, lev);
      max_level = std::max(max_level, lev);
      p = std::move(w);
      R -= q;
    } else {
      --lev;
    }
  }
  out.split_time = i0;

  for (int n = 0; n <= max_level; ++n) {
    S norm = S(matrix_norm(H.chain().matrix(n)));
    out.bound += 2 * norm * sums.sup_norm(n);
  }
  return out;
}

// ----------------------------------------------------------- broken sums

template <class S>
S broken_sum(const SpecialSums<S>& sums, const BrokenSumSpec<S>& spec, BrokenConvention convention) {
  const TowerHierarchy<S>& H = sums.hierarchy();
  const int k = spec.level, j = spec.tower;
  const long long m = spec.break_height;
  if (m < 0 || m >= H.height(k, j)) throw Error(ErrorCode::RangeError, "break height outside the tower");
  S head_x = sums.partial(k, j, spec.x, m);
  S tail_y = sums(k, j, spec.y) - sums.partial(k, j, spec.y, m);
  S value = head_x + tail_y;
  if (convention == BrokenConvention::Concatenation) return value;
  // Both raw variants add f at the return point T^q(y).
  S ret = H.jump(k, j, spec.y);
  value += sums.observable()(H.level(0).top_label_at(ret), ret);
  if (convention == BrokenConvention::AsSupremum) {
    // Head runs over T^i x for 1 <= i <= m-1, or is f(x) alone when m = 0.
    if (m >= 1) value -= sums.observable()(H.level(0).top_label_at(spec.x), spec.x);
    else value += sums.observable()(H.level(0).top_label_at(spec.x), spec.x);
  }
  return value;
}

template <class S>
BrokenSupEstimate<S> broken_sup_estimate(const SpecialSums<S>& sums, int k, int j,
                                         const BrokenSampling& sampling) {
  using std::abs;
  const TowerHierarchy<S>& H = sums.hierarchy();
  const long long q = H.height(k, j);
  const auto& base = H.level(k).top_interval(j);
  const S& tol = H.tolerance();
  const S points[3] = {base.left + tol, base.midpoint(), base.right - tol};
  S full[3];
  for (int i = 0; i < 3; ++i) full[i] = sums(k, j, points[i]);

  std::vector<long long> breaks;
  if (q <= sampling.max_breaks) {
    for (long long m = 0; m < q; ++m) breaks.push_back(m);
  } else {
    const long long n = sampling.max_breaks;
    for (long long i = 0; i < n; ++i) breaks.push_back(i * (q - 1) / (n - 1));
  }

  BrokenSupEstimate<S> est{-infinity<S>(), infinity<S>(), S(0), S(0), 0};
  for (long long m : breaks) {
    S head[3];
    for (int i = 0; i < 3; ++i) head[i] = sums.partial(k, j, points[i], m);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        S v = head[a] + full[b] - head[b];
        if (v > est.sup) est.sup = v;
        if (v < est.inf) est.inf = v;
      }
    }
    ++est.breaks_sampled;
  }
  est.abs_sup = abs(est.sup) > abs(est.inf) ? abs(est.sup) : abs(est.inf);
  for (int i = 0; i < 3; ++i) {
    S g = abs(est.sup - full[i]);
    if (g > est.gap) est.gap = g;
  }
  return est;
}

template <class S>
S SpecialSums<S>::broken_abs_sup(int k, int j) const {
  auto key = std::make_pair(k, j);
  {
    std::lock_guard lock(*cache_mutex_);
    if (auto it = broken_cache_.find(key); it != broken_cache_.end()) return it->second;
  }
  S v = broken_sup_estimate(*this, k, j).abs_sup;
  std::lock_guard lock(*cache_mutex_);
  broken_cache_.emplace(key, v);
  return v;
}

#define GIETLAB_INSTANTIATE(S)                                                                 \
  template class Observable<S>;                                                                \
  template S birkhoff_sum<S>(const Giet<S>&, const Observable<S>&, const S&, long long);       \
  template class SpecialSums<S>;                                                               \
  template SpecialSumTable<S> special_sums<S>(const SpecialSums<S>&, int, int);                \
  template GeometricDecomposition<S> geometric_decomposition<S>(const SpecialSums<S>&,         \
                                                                const S&, long long);          \
  template S broken_sum<S>(const SpecialSums<S>&, const BrokenSumSpec<S>&, BrokenConvention);  \
  template BrokenSupEstimate<S> broken_sup_estimate<S>(const SpecialSums<S>&, int, int,        \
                                                       const BrokenSampling&);

GIETLAB_INSTANTIATE(double)
GIETLAB_INSTANTIATE(Real)

}  // namespace gietlab
