#include "gietlab/regularity.hpp"

#include "gietlab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace gietlab {

// ------------------------------------------------------- piecewise linear

template <class S>
S PiecewiseLinear<S>::operator()(const S& x) const {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i]);
}

template <class S>
S PiecewiseLinear<S>::inverse(const S& y) const {
  if (y <= ys.front()) return xs.front();
  if (y >= ys.back()) return xs.back();
  auto it = std::upper_bound(ys.begin(), ys.end(), y);
  std::size_t i = static_cast<std::size_t>(it - ys.begin()) - 1;
  return xs[i] + (xs[i + 1] - xs[i]) * (y - ys[i]) / (ys[i + 1] - ys[i]);
}

template <class S>
S PiecewiseLinear<S>::slope_at(std::size_t i) const {
  const std::size_t lo = i == 0 ? 0 : i - 1;
  const std::size_t hi = i + 1 < xs.size() ? i + 1 : i;
  return (ys[hi] - ys[lo]) / (xs[hi] - xs[lo]);
}

// ------------------------------------------------------ numeric conjugacy

template <class S>
PiecewiseLinear<S> numeric_conjugacy(const InductionChain<S>& chain, const InductionChain<S>& model,
                                     int k, long long floor_cap) {
  if (!(chain.base().combinatorics() == model.base().combinatorics()))
    throw Error(ErrorCode::PartitionMismatch, "combinatorics differ");
  for (int i = 0; i < k; ++i)
    if (chain.matrix(i) != model.matrix(i))
      throw Error(ErrorCode::PartitionMismatch, "induction paths diverge", i);
  const DynamicalPartition<S> P = build_partition(chain, k, floor_cap);
  const DynamicalPartition<S> P0 = build_partition(model, k, floor_cap);
  if (P.floors.size() != P0.floors.size())
    throw Error(ErrorCode::PartitionMismatch, "floor counts differ", k);
  for (std::size_t i = 0; i < P.floors.size(); ++i)
    if (P.floors[i].tower != P0.floors[i].tower || P.floors[i].height != P0.floors[i].height)
      throw Error(ErrorCode::PartitionMismatch, "floor orders differ", static_cast<long long>(i));
  PiecewiseLinear<S> h{P.endpoints(), P0.endpoints()};
  for (std::size_t i = 1; i < h.xs.size(); ++i)
    if (!(h.xs[i] > h.xs[i - 1]) || !(h.ys[i] > h.ys[i - 1]))
      throw Error(ErrorCode::PartitionMismatch, "floor endpoints not increasing", static_cast<long long>(i));
  return h;
}

template <class S>
PiecewiseLinear<S> numeric_conjugacy(const Giet<S>& T, const Giet<S>& T0, int k, Acceleration kind,
                                     long long floor_cap) {
  InductionChain<S> chain(T, kind), model(T0, kind);
  chain.extend_to(k);
  model.extend_to(k);
  return numeric_conjugacy(chain, model, k, floor_cap);
}

template <class S>
S conjugacy_residual(const Giet<S>& T, const Giet<S>& T0, const PiecewiseLinear<S>& h, int grid) {
  using std::abs;
  S worst = S(0);
  for (int i = 0; i < grid; ++i) {
    S x = T.length() * (S(i) + S(1) / 2) / S(grid);
    try {
      S v = abs(h(apply(T, x)) - apply(T0, h(x)));
      if (v > worst) worst = v;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AtSingularity) throw;
    }
  }
  return worst;
}

template <class S>
std::vector<LogSlopeSample<S>> stable_log_derivative(const PiecewiseLinear<S>& coarse,
                                                     const PiecewiseLinear<S>& fine,
                                                     const S& threshold) {
  using std::abs;
  using std::log;
  std::vector<LogSlopeSample<S>> out;
  for (std::size_t i = 1; i + 1 < coarse.xs.size(); ++i) {
    const S& x = coarse.xs[i];
    auto it = std::lower_bound(fine.xs.begin(), fine.xs.end(), x);
    std::size_t j = static_cast<std::size_t>(it - fine.xs.begin());
    if (j > 0 && (j == fine.xs.size() || abs(fine.xs[j - 1] - x) < abs(fine.xs[j] - x))) --j;
    S a = log(coarse.slope_at(i)), b = log(fine.slope_at(j));
    if (abs(a - b) <= threshold) out.push_back({x, -b});
  }
  return out;
}

// ---------------------------------------------------------- orbit of zero

template <class S>
S orbit_sum(const SpecialSums<S>& sums, long long t) {
  S sum = S(0);
  if (t <= 0) return sum;
  sums.hierarchy().orbit_climb(t, [&](int lev, int lab, const S& p) { sum += sums(lev, lab, p); });
  return sum;
}

namespace {

// First t >= p with z_t in floor (k, tower, height); fails past p + window.
template <class S>
long long find_entry(const TowerHierarchy<S>& H, long long p, int k, const FloorAddress& target,
                     long long window) {
  auto a = H.orbit_address(p, k);
  long long t;
  if (a.tower == target.tower && a.height <= target.height) {
    t = p + (target.height - a.height);
  } else {
    t = p + (H.height(k, a.tower) - a.height);
    S base = H.jump(k, a.tower, a.base);
    for (;;) {
      if (t - p >= window) break;
      int lab = H.level(k).top_label_at(base);
      if (lab == target.tower) {
        t += target.height;
        break;
      }
      t += H.height(k, lab);
      base = H.jump(k, lab, base);
    }
  }
  if (t - p >= window)
    throw Error(ErrorCode::WindowExhausted, "orbit missed the target floor within the proven window", k);
  return t;
}

template <class S>
long long max_height(const TowerHierarchy<S>& H, int k) {
  return H.max_height(k);
}

BigInt pair_bound(const IntegerMatrix& a, const IntegerMatrix& b) {
  return 2 * matrix_norm(a) * matrix_norm(b);
}

}  // namespace

template <class S>
ApproximationCertificate<S> single_orbit_approximation(const TowerHierarchy<S>& H, const S& x,
                                                       const S& y, int depth) {
  if (depth + 1 > H.depth())
    throw Error(ErrorCode::DepthBudget, "approximation needs one level past its depth", depth + 1);
  ApproximationCertificate<S> c;
  c.x = x;
  c.y = y;
  c.depth = depth;
  auto ax = H.address(x, 0), ay = H.address(y, 0);
  c.x_floors.push_back(ax.floor());
  c.y_floors.push_back(ay.floor());
  for (int k = 1; k <= depth; ++k) {
    ax = H.refine(ax);
    ay = H.refine(ay);
    c.x_floors.push_back(ax.floor());
    c.y_floors.push_back(ay.floor());
  }
  int k0 = -1;
  for (int k = 0; k <= depth; ++k) {
    const auto& fx = c.x_floors[k];
    const auto& fy = c.y_floors[k];
    if (fx.tower != fy.tower || fx.height != fy.height) {
      k0 = k;
      break;
    }
  }
  if (k0 < 0) throw Error(ErrorCode::DepthBudget, "points share a floor at every available level", depth);
  if (k0 == 0) throw Error(ErrorCode::InvalidArgument, "points lie in different level-0 floors");
  c.k0 = k0;
  const IntegerMatrix& A_prev = H.chain().matrix(k0 - 1);
  const IntegerMatrix& A_k0 = H.chain().matrix(k0);

  long long budget = 0;
  const int budget_level = std::min(k0 + 2, H.depth());
  for (int j = 0; j < H.level(0).d(); ++j) budget += H.height(budget_level, j);
  c.p0 = find_entry(H, 0, k0, c.x_floors[k0], budget);

  const long long i0 = c.p0;
  const long long j0 = find_entry(H, c.p0, k0, c.y_floors[k0], 2 * max_height(H, k0 + 1));
  c.xs.push_back({i0, H.orbit_point(i0), c.x_floors[k0]});
  c.ys.push_back({j0, H.orbit_point(j0), c.y_floors[k0]});
  c.bridge_count = H.visits_before(k0 - 1, std::max(i0, j0)) - H.visits_before(k0 - 1, std::min(i0, j0));
  c.bridge_bound = pair_bound(A_prev, A_k0);

  for (int k = k0; k < depth; ++k) {
    const long long window = 2 * max_height(H, k + 2);
    const long long ix = c.xs.back().index, iy = c.ys.back().index;
    const long long nx = find_entry(H, ix, k + 1, c.x_floors[k + 1], window);
    const long long ny = find_entry(H, iy, k + 1, c.y_floors[k + 1], window);
    c.x_counts.push_back(H.visits_before(k, nx) - H.visits_before(k, ix));
    c.y_counts.push_back(H.visits_before(k, ny) - H.visits_before(k, iy));
    c.step_bounds.push_back(pair_bound(H.chain().matrix(k), H.chain().matrix(k + 1)));
    c.xs.push_back({nx, H.orbit_point(nx), c.x_floors[k + 1]});
    c.ys.push_back({ny, H.orbit_point(ny), c.y_floors[k + 1]});
  }
  return c;
}

// ------------------------------------------------------------- verifier

template <class S>
CertificateVerifier<S>::CertificateVerifier(const InductionChain<S>& chain, long long floor_cap)
    : chain_(&chain), floor_cap_(floor_cap) {
  orbit_.push_back(S(0));
}

template <class S>
const S& CertificateVerifier<S>::orbit(long long t) {
  while (static_cast<long long>(orbit_.size()) <= t) {
    S next = apply(chain_->base(), orbit_.back());
    orbit_.push_back(std::move(next));
  }
  return orbit_[static_cast<std::size_t>(t)];
}

template <class S>
const DynamicalPartition<S>& CertificateVerifier<S>::partition(int k) {
  auto it = partitions_.find(k);
  if (it == partitions_.end()) it = partitions_.emplace(k, build_partition(*chain_, k, floor_cap_)).first;
  return it->second;
}

template <class S>
FloorAddress CertificateVerifier<S>::floor_of(int k, const S& x, bool left_closed) {
  const auto& P = partition(k);
  const S key = left_closed ? S(x + P.tolerance) : x;
  auto it = std::upper_bound(P.floors.begin(), P.floors.end(), key,
                             [](const S& v, const Floor<S>& f) { return v < f.left; });
  if (it == P.floors.begin()) return {k, -1, -1};
  const Floor<S>& f = *(it - 1);
  return {k, f.tower, f.height};
}

template <class S>
long long CertificateVerifier<S>::visits(int k, long long from, long long to) {
  const S top = chain_->inducing_length(k) - chain_->base().tolerance();
  long long n = 0;
  for (long long t = from; t < to; ++t)
    if (orbit(t) < top) ++n;
  return n;
}

template <class S>
CertificateAudit CertificateVerifier<S>::audit(const ApproximationCertificate<S>& c) {
  using std::abs;
  CertificateAudit a;
  auto note = [&](std::string s) {
    a.notes.push_back(std::move(s));
    a.passed = false;
  };
  const S& tol = chain_->base().tolerance();
  auto check_point = [&](const OrbitPoint<S>& p, int k, const S& target, const char* name) {
    const S& z = orbit(p.index);
    if (abs(z - p.point) > tol * S(64) * S(p.index + 1)) {
      ++a.mismatches;
      note(std::string(name) + " differs from the raw orbit at level " + std::to_string(k));
    }
    FloorAddress fz = floor_of(k, z, true);
    FloorAddress ft = floor_of(k, target, false);
    if (!(fz == ft)) {
      ++a.mismatches;
      note(std::string(name) + " is not in the floor of its target at level " + std::to_string(k));
    }
    if (!(p.floor == ft)) {
      ++a.mismatches;
      note(std::string(name) + " floor address disagrees with the flat partition at level " +
           std::to_string(k));
    }
  };
  for (std::size_t s = 0; s < c.xs.size(); ++s) {
    const int k = c.k0 + static_cast<int>(s);
    check_point(c.xs[s], k, c.x, "x approximant");
    check_point(c.ys[s], k, c.y, "y approximant");
  }
  if (!(floor_of(c.k0 - 1, c.x, false) == floor_of(c.k0 - 1, c.y, false))) {
    ++a.mismatches;
    note("x and y do not share a floor one level above the scale");
  }
  const long long lo = std::min(c.xs[0].index, c.ys[0].index);
  const long long hi = std::max(c.xs[0].index, c.ys[0].index);
  const long long bridge = visits(c.k0 - 1, lo, hi);
  if (bridge != c.bridge_count) {
    ++a.mismatches;
    note("bridge count differs from the raw orbit");
  }
  if (BigInt(bridge) > c.bridge_bound) {
    ++a.bound_violations;
    note("bridge count exceeds its bound");
  }
  for (std::size_t s = 0; s + 1 < c.xs.size(); ++s) {
    const int k = c.k0 + static_cast<int>(s);
    for (int side = 0; side < 2; ++side) {
      const auto& seq = side == 0 ? c.xs : c.ys;
      const auto& counts = side == 0 ? c.x_counts : c.y_counts;
      const long long n = visits(k, seq[s].index, seq[s + 1].index);
      if (n != counts[s]) {
        ++a.mismatches;
        note("step count differs from the raw orbit at level " + std::to_string(k));
      }
      if (BigInt(n) > c.step_bounds[s]) {
        ++a.bound_violations;
        note("step count exceeds its bound at level " + std::to_string(k));
      }
    }
  }
  return a;
}

// ------------------------------------------------------ orbit variation

template <class S>
OrbitVariation<S> orbit_variation_bound(const SpecialSums<S>& sums, long long p, long long q, int k) {
  const TowerHierarchy<S>& H = sums.hierarchy();
  if (p > q) std::swap(p, q);
  auto ap = H.orbit_address(p, k), aq = H.orbit_address(q, k);
  if (ap.tower != aq.tower || ap.height != aq.height)
    throw Error(ErrorCode::NotSameFloor, "orbit points lie in different floors", k);
  OrbitVariation<S> v;
  v.tower = ap.tower;
  v.special_norm = sums.sup_norm(k);
  if (p == q) {
    v.value = S(0);
    v.bound = S(0);
    v.broken_sup = S(0);
    return v;
  }
  constexpr long long kDirectCap = 200'000;
  if (q - p <= kDirectCap)
    v.value = birkhoff_sum(H.level(0), sums.observable(), H.orbit_point(p), q - p);
  else
    v.value = orbit_sum(sums, q) - orbit_sum(sums, p);
  v.crossings = H.visits_before(k, q) - H.visits_before(k, p);
  v.broken_sup = sums.broken_abs_sup(k, v.tower);
  v.bound = S(v.crossings) * v.special_norm + v.broken_sup;
  return v;
}

// ------------------------------------------------------------ holder fit

template <class S>
PairVariation<S> pair_variation(const SpecialSums<S>& sums, const S& x, const S& y, int refinement) {
  using std::abs;
  const TowerHierarchy<S>& H = sums.hierarchy();
  PairVariation<S> r;
  r.x = x < y ? x : y;
  r.y = x < y ? y : x;
  r.dx = r.y - r.x;
  r.dphi = S(0);
  try {
    PairScale<S> scale = scale_of_pair(H, r.x, r.y);
    r.k0 = scale.k0;
    r.covering = scale.covering;
    if (r.k0 == 0) {
      r.skipped = "scale 0";
      return r;
    }
    const int K = r.k0 + refinement;
    auto delta = [&](const S& a, const S& b) {
      auto c = single_orbit_approximation(H, a, b, K);
      return orbit_sum(sums, c.ys.back().index) - orbit_sum(sums, c.xs.back().index);
    };
    if (scale.covering == Covering::OneFloor) {
      r.dphi = delta(r.x, r.y);
    } else {
      const S e = H.tolerance() * 64;
      r.dphi = delta(r.x, scale.shared_endpoint - e) + delta(scale.shared_endpoint + e, r.y);
    }
  } catch (const Error& e) {
    r.skipped = std::string(error_name(e.code())) + ": " + e.what();
  }
  return r;
}

namespace {

struct LevelExtremes {
  std::vector<double> levels, values;
};

// Per-level minimum (lower = true) or maximum of the values.
LevelExtremes extremes(const std::vector<std::pair<int, double>>& data, bool lower) {
  std::map<int, double> best;
  for (auto [k, v] : data) {
    auto it = best.find(k);
    if (it == best.end())
      best.emplace(k, v);
    else
      it->second = lower ? std::min(it->second, v) : std::max(it->second, v);
  }
  LevelExtremes out;
  for (auto [k, v] : best) {
    out.levels.push_back(k);
    out.values.push_back(v);
  }
  return out;
}

}  // namespace

template <class S>
RegularityReport<S> holder_fit(const SpecialSums<S>& sums, const InductionChain<S>& model,
                               const std::vector<SamplePair<S>>& pairs, const HolderOptions& options) {
  using std::abs;
  const TowerHierarchy<S>& H = sums.hierarchy();
  const InductionChain<S>& chain = H.chain();
  RegularityReport<S> report;
  const int limit = options.depth < 0 ? H.depth() - 1 : std::min(options.depth, H.depth() - 1);
  const int refinement = std::max(0, std::min(options.refinement, limit));

  // Levels are warmed up front so that workers only read the caches.
  for (int k = 0; k <= H.depth(); ++k) sums.sup_norm(k);

  report.per_pair.resize(pairs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      PairVariation<S> r;
      const S& a = pairs[i].x;
      const S& b = pairs[i].y;
      r = pair_variation(sums, a, b, refinement);
      if (r.skipped.empty() && r.k0 + refinement > limit) r.skipped = "beyond depth";
      report.per_pair[i] = std::move(r);
    }
  };
  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::map<int, int> per_level;
  for (const auto& r : report.per_pair)
    if (r.skipped.empty()) ++per_level[r.k0];
  std::vector<std::pair<int, double>> dx, dphi;
  bool any_variation = false;
  const S zero_level = H.tolerance() * 1024;
  for (const auto& r : report.per_pair) {
    if (!r.skipped.empty() || per_level[r.k0] < options.min_pairs_per_level) continue;
    dx.emplace_back(r.k0, std::log(to_double(r.dx)));
    if (abs(r.dphi) > zero_level) {
      any_variation = true;
      dphi.emplace_back(r.k0, std::log(to_double(abs(r.dphi))));
    }
  }

  auto lower = extremes(dx, true);
  if (lower.levels.size() >= 2) {
    LineFit f = lad_fit(lower.levels, lower.values);
    report.lambda1 = std::exp(f.slope);
    report.length_constant = std::exp(f.intercept);
  } else {
    report.insufficient_levels = true;
  }
  if (!any_variation) {
    report.affine_degenerate = true;
    report.lambda2 = 0;
  } else {
    auto upper = extremes(dphi, false);
    if (upper.levels.size() >= 2) {
      LineFit f = lad_fit(upper.levels, upper.values);
      report.lambda2 = std::exp(f.slope);
      report.variation_constant = std::exp(f.intercept);
    } else {
      report.insufficient_levels = true;
    }
  }
  if (!report.insufficient_levels && any_variation) {
    report.insufficient_decay = report.lambda2 >= 1;
    report.lambda_order_violation = report.lambda2 <= report.lambda1;
    if (report.lambda1 > 0 && report.lambda1 < 1 && report.lambda2 > 0 && report.lambda2 < 1) {
      const double alpha = std::log(report.lambda2) / std::log(report.lambda1);
      report.alpha = alpha;
      if (alpha > 1) report.affine_degenerate = true;
      double best = 0;
      for (const auto& r : report.per_pair) {
        if (!r.skipped.empty()) continue;
        double q = to_double(abs(r.dphi)) / std::pow(to_double(r.dx), alpha);
        best = std::max(best, q);
      }
      report.holder_constant = best;
    }
  }

  // Convergence of renormalization: d_C2(R^m T, I_d) <= C(T) rho^m.
  std::vector<double> ms, logs, raw;
  const int levels = std::min(options.decay_levels, chain.depth());
  for (int m = 0; m <= levels; ++m) {
    double v = to_double(c2_distance_to_iets(renormalized_map(chain, m)));
    raw.push_back(v);
    if (v > 0) {
      ms.push_back(m);
      logs.push_back(std::log(v));
    }
  }
  if (ms.size() >= 3) {
    LineFit f = ols_fit(ms, logs);
    report.decay_rate = std::exp(f.slope);
    for (std::size_t m = 0; m < raw.size(); ++m)
      report.decay_constant =
          std::max(report.decay_constant, raw[m] / std::pow(report.decay_rate, static_cast<double>(m)));
  }

  // d_{C^{1+alpha}}(h, Id) from the finest affordable conjugacy level.
  const int d = chain.base().d();
  int kh = 0;
  for (int k = 1; k <= std::min(chain.depth(), model.depth()); ++k) {
    if (chain.heights(k).sum() > BigInt(kDefaultFloorCap / 10)) break;
    kh = k;
  }
  PiecewiseLinear<S> h = numeric_conjugacy(chain, model, kh);
  double sup_h = 0, sup_dh = 0, max_dh = 0;
  for (std::size_t i = 0; i < h.xs.size(); ++i) {
    sup_h = std::max(sup_h, to_double(abs(h.ys[i] - h.xs[i])));
    double s = to_double(h.slope_at(i));
    sup_dh = std::max(sup_dh, std::abs(s - 1));
    max_dh = std::max(max_dh, s);
  }
  report.quantitative_distance = sup_h + sup_dh + max_dh * report.holder_constant;

  for (int k = 0; k <= model.depth(); ++k) {
    const Giet<S>& Tk = model.level(k);
    S shortest = Tk.top_interval(0).length();
    for (int j = 1; j < d; ++j) shortest = std::min(shortest, S(Tk.top_interval(j).length()));
    BigInt norm = matrix_norm(cocycle_product(model, 0, k));
    report.length_bounds.push_back(
        {k, to_double(shortest), 1.0 / (static_cast<double>(d) * norm.template convert_to<double>())});
  }
  return report;
}

#define GIETLAB_INSTANTIATE(S)                                                                      \
  template struct PiecewiseLinear<S>;                                                               \
  template PiecewiseLinear<S> numeric_conjugacy<S>(const InductionChain<S>&,                        \
                                                   const InductionChain<S>&, int, long long);       \
  template PiecewiseLinear<S> numeric_conjugacy<S>(const Giet<S>&, const Giet<S>&, int,             \
                                                   Acceleration, long long);                        \
  template S conjugacy_residual<S>(const Giet<S>&, const Giet<S>&, const PiecewiseLinear<S>&, int); \
  template std::vector<LogSlopeSample<S>> stable_log_derivative<S>(                                 \
      const PiecewiseLinear<S>&, const PiecewiseLinear<S>&, const S&);                              \
  template S orbit_sum<S>(const SpecialSums<S>&, long long);                                        \
  template ApproximationCertificate<S> single_orbit_approximation<S>(const TowerHierarchy<S>&,      \
                                                                     const S&, const S&, int);      \
  template class CertificateVerifier<S>;                                                            \
  template OrbitVariation<S> orbit_variation_bound<S>(const SpecialSums<S>&, long long, long long,  \
                                                      int);                                         \
  template PairVariation<S> pair_variation<S>(const SpecialSums<S>&, const S&, const S&, int);     \
  template RegularityReport<S> holder_fit<S>(const SpecialSums<S>&, const InductionChain<S>&,       \
                                             const std::vector<SamplePair<S>>&,                     \
                                             const HolderOptions&);

GIETLAB_INSTANTIATE(double)
GIETLAB_INSTANTIATE(Real)

}  // namespace gietlab
