#include "gietlab/towers.hpp"

#include "gietlab/errors.hpp"

#include <algorithm>

namespace gietlab {

template <class S>
std::vector<S> DynamicalPartition<S>::endpoints() const {
  std::vector<S> out;
  out.reserve(floors.size() + 1);
  for (const auto& f : floors) out.push_back(f.left);
  if (!floors.empty()) out.push_back(floors.back().right);
  return out;
}

template <class S>
DynamicalPartition<S> build_partition(const InductionChain<S>& chain, int k, long long floor_cap) {
  const Giet<S>& T = chain.base();
  const Giet<S>& Tk = chain.level(k);
  const int d = T.d();
  BigInt total = chain.heights(k).sum();
  if (total > floor_cap)
    throw Error(ErrorCode::FloorBudgetExceeded, "partition exceeds the floor cap", k);

  DynamicalPartition<S> P;
  P.level = k;
  P.tolerance = T.tolerance();
  P.bases.resize(d);
  P.heights.assign(d, 0);
  P.floors.reserve(static_cast<std::size_t>(to_int64(total)));
  const S top = Tk.length() + T.tolerance();
  for (int j = 0; j < d; ++j) {
    P.bases[j] = Tk.top_interval(j);
    S a = P.bases[j].left, b = P.bases[j].right;
    long long m = 0;
    for (;;) {
      P.floors.push_back({a, b, j, m});
      ++m;
      const Chain<S>& branch = T.branch(T.top_label_at((a + b) / 2));
      a = branch.value(a);
      b = branch.value(b);
      if (b <= top) break;
      if (m > floor_cap)
        throw Error(ErrorCode::FloorBudgetExceeded, "tower does not return within the cap", k);
    }
    P.heights[j] = m;
  }
  std::sort(P.floors.begin(), P.floors.end(),
            [](const Floor<S>& u, const Floor<S>& v) { return u.left < v.left; });
  return P;
}

template <class S>
FloorAddress locate(const DynamicalPartition<S>& P, const S& x) {
  using std::abs;
  auto it = std::upper_bound(P.floors.begin(), P.floors.end(), x,
                             [](const S& v, const Floor<S>& f) { return v < f.left; });
  if (it == P.floors.begin()) throw Error(ErrorCode::InvalidArgument, "point outside the domain");
  const Floor<S>& f = *(it - 1);
  if (x > f.right + P.tolerance) throw Error(ErrorCode::InvalidArgument, "point outside the domain");
  if (abs(x - f.left) < P.tolerance || abs(x - f.right) < P.tolerance)
    throw Error(ErrorCode::OnBoundary, "point on a floor endpoint");
  return {P.level, f.tower, f.height};
}

template <class S>
S mesh(const DynamicalPartition<S>& P) {
  S m = S(0);
  for (const auto& f : P.floors)
    if (f.right - f.left > m) m = f.right - f.left;
  return m;
}

// ------------------------------------------------------------- hierarchy

template <class S>
TowerHierarchy<S>::TowerHierarchy(const InductionChain<S>& chain) : chain_(&chain) {
  const int d = chain.base().d();
  depth_ = 0;
  heights_.push_back(std::vector<long long>(d, 1));
  for (int k = 1; k <= chain.depth(); ++k) {
    const IntegerVector& q = chain.heights(k);
    std::vector<long long> row(d);
    bool ok = true;
    for (int j = 0; j < d; ++j) {
      if (!fits_int64(q[j] * 4)) {
        ok = false;
        break;
      }
      row[j] = q[j].template convert_to<long long>();
    }
    if (!ok) break;
    heights_.push_back(std::move(row));
    depth_ = k;
  }
  within_.resize(depth_ + 1);
  for (int K = 0; K <= depth_; ++K) {
    within_[K].resize(K + 1);
    within_[K][K].assign(d, 1);
    for (int k = 0; k < K; ++k) {
      within_[K][k].assign(d, 0);
      for (int j = 0; j < d; ++j)
        for (int t : itinerary(K - 1, j)) within_[K][k][j] += within_[K - 1][k][t];
    }
  }
  pieces_.resize(depth_);
  for (int n = 0; n < depth_; ++n) {
    const Giet<S>& next = chain.level(n + 1);
    auto& pieces = pieces_[n];
    for (int j = 0; j < d; ++j) {
      S a = next.top_interval(j).left, b = next.top_interval(j).right;
      long long offset = 0;
      const auto& word = itinerary(n, j);
      for (std::size_t t = 0; t < word.size(); ++t) {
        pieces.push_back({a, b, j, static_cast<int>(t), offset});
        offset += heights_[n][word[t]];
        if (t + 1 < word.size()) {
          a = jump(n, word[t], a);
          b = jump(n, word[t], b);
        }
      }
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& u, const Piece& v) { return u.left < v.left; });
  }
}

template <class S>
long long TowerHierarchy<S>::max_height(int k) const {
  return *std::max_element(heights_[k].begin(), heights_[k].end());
}

template <class S>
S TowerHierarchy<S>::jump(int k, int j, const S& x) const {
  return chain_->level(k).branch(j).value(x);
}

template <class S>
S TowerHierarchy<S>::jump_back(int k, int j, const S& x) const {
  return chain_->level(k).branch(j).inverse_value(x);
}

template <class S>
S TowerHierarchy<S>::climb(int k, int j, const S& x, long long m, const Visitor& visit) const {
  if (k < 0 || k > depth_) throw Error(ErrorCode::DepthBudget, "level beyond the hierarchy", k);
  if (m < 0 || m > heights_[k][j]) throw Error(ErrorCode::RangeError, "height outside the tower");
  S p = x;
  int lev = k, lab = j;
  long long rem = m;
  for (;;) {
    if (rem == 0) return p;
    if (rem == heights_[lev][lab]) {
      if (visit) visit(lev, lab, p);
      return jump(lev, lab, p);
    }
    const auto& word = itinerary(lev - 1, lab);
    for (int t : word) {
      long long h = heights_[lev - 1][t];
      if (rem >= h) {
        if (visit) visit(lev - 1, t, p);
        p = jump(lev - 1, t, p);
        rem -= h;
        if (rem == 0) return p;
      } else {
        lab = t;
        break;
      }
    }
    --lev;
  }
}

template <class S>
typename TowerHierarchy<S>::Address TowerHierarchy<S>::address(const S& x, int k) const {
  if (k > depth_) throw Error(ErrorCode::DepthBudget, "level beyond the hierarchy", k);
  Address a{0, chain_->base().top_label_at(x), 0, x};
  for (int n = 0; n < k; ++n) a = refine(a);
  return a;
}

template <class S>
typename TowerHierarchy<S>::Address TowerHierarchy<S>::refine(const Address& a) const {
  using std::abs;
  const int n = a.level;
  if (n >= depth_) throw Error(ErrorCode::DepthBudget, "level beyond the hierarchy", n + 1);
  const auto& pieces = pieces_[n];
  auto it = std::upper_bound(pieces.begin(), pieces.end(), a.base,
                             [](const S& v, const Piece& p) { return v < p.left; });
  if (it == pieces.begin()) it = pieces.begin() + 1;
  const Piece& p = *(it - 1);
  const S& tol = tolerance();
  const bool inner_left = &p != &pieces.front();
  const bool inner_right = &p != &pieces.back();
  if ((inner_left && abs(a.base - p.left) < tol) || (inner_right && abs(a.base - p.right) < tol))
    throw Error(ErrorCode::OnBoundary, "point on a floor endpoint", n + 1);
  const auto& word = itinerary(n, p.tower);
  if (word[p.slot] != a.tower)
    throw Error(ErrorCode::OnBoundary, "inconsistent tower nesting near a floor endpoint", n + 1);
  S w = a.base;
  for (int s = p.slot - 1; s >= 0; --s) w = jump_back(n, word[s], w);
  return {n + 1, p.tower, a.height + p.offset, w};
}

template <class S>
Interval<S> TowerHierarchy<S>::floor_interval(int k, int j, long long m) const {
  const auto& base = chain_->level(k).top_interval(j);
  return {climb(k, j, base.left, m), climb(k, j, base.right, m)};
}

template <class S>
int TowerHierarchy<S>::orbit_level(long long n, int at_least) const {
  for (int K = at_least; K <= depth_; ++K) {
    int j0 = chain_->level(K).combinatorics().top(0);
    if (n <= heights_[K][j0]) return K;
  }
  throw Error(ErrorCode::DepthBudget, "orbit index beyond the hierarchy", n);
}

template <class S>
typename TowerHierarchy<S>::Address TowerHierarchy<S>::orbit_address(long long n, int k) const {
  if (n < 0) throw Error(ErrorCode::RangeError, "negative orbit index");
  int lev = orbit_level(n + 1, k);
  int lab = chain_->level(lev).combinatorics().top(0);
  long long rem = n;
  S p = S(0);
  while (lev > k) {
    for (int t : itinerary(lev - 1, lab)) {
      long long h = heights_[lev - 1][t];
      if (rem >= h) {
        p = jump(lev - 1, t, p);
        rem -= h;
      } else {
        lab = t;
        break;
      }
    }
    --lev;
  }
  return {k, lab, rem, p};
}

template <class S>
S TowerHierarchy<S>::orbit_point(long long n) const {
  return orbit_address(n, 0).base;
}

template <class S>
S TowerHierarchy<S>::orbit_climb(long long t, const Visitor& visit) const {
  int K = orbit_level(t, 0);
  return climb(K, chain_->level(K).combinatorics().top(0), S(0), t, visit);
}

template <class S>
long long TowerHierarchy<S>::visits_before(int k, long long t) const {
  if (t <= 0) return 0;
  int lev = orbit_level(t, k);
  int lab = chain_->level(lev).combinatorics().top(0);
  long long rem = t, count = 0;
  for (;;) {
    if (lev == k) return count + 1;
    for (int s : itinerary(lev - 1, lab)) {
      long long h = heights_[lev - 1][s];
      if (rem >= h) {
        count += within_[lev - 1][k][s];
        rem -= h;
        if (rem == 0) return count;
      } else {
        lab = s;
        break;
      }
    }
    --lev;
  }
}

template <class S>
PairScale<S> scale_of_pair(const TowerHierarchy<S>& H, const S& x0, const S& y0) {
  using std::abs;
  if (x0 == y0) throw Error(ErrorCode::InvalidArgument, "scale needs two distinct points");
  const S& x = x0 < y0 ? x0 : y0;
  const S& y = x0 < y0 ? y0 : x0;
  auto ax = H.address(x, 0), ay = H.address(y, 0);
  PairScale<S> prev{0, Covering::OneFloor, S(0), ax.floor(), ay.floor()};
  for (int k = 0; k <= H.depth(); ++k) {
    if (k > 0) {
      ax = H.refine(ax);
      ay = H.refine(ay);
    }
    PairScale<S> here{k, Covering::OneFloor, S(0), ax.floor(), ay.floor()};
    if (ax.tower != ay.tower || ax.height != ay.height) {
      S right = H.floor_interval(k, ax.tower, ax.height).right;
      S left = H.floor_interval(k, ay.tower, ay.height).left;
      if (abs(right - left) > H.tolerance()) {
        prev.k0 = k;
        return prev;
      }
      here.covering = Covering::TwoAdjacentFloors;
      here.shared_endpoint = right;
    }
    prev = here;
  }
  throw Error(ErrorCode::ScaleNotFound, "no full floor inside the pair within the available depth");
}

#define GIETLAB_INSTANTIATE(S)                                                                  \
  template struct DynamicalPartition<S>;                                                        \
  template DynamicalPartition<S> build_partition<S>(const InductionChain<S>&, int, long long);  \
  template FloorAddress locate<S>(const DynamicalPartition<S>&, const S&);                      \
  template S mesh<S>(const DynamicalPartition<S>&);                                             \
  template class TowerHierarchy<S>;                                                             \
  template PairScale<S> scale_of_pair<S>(const TowerHierarchy<S>&, const S&, const S&);

GIETLAB_INSTANTIATE(double)
GIETLAB_INSTANTIATE(Real)

}  // namespace gietlab
