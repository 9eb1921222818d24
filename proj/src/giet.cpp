#include "gietlab/giet.hpp"

#include "gietlab/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>

namespace gietlab {
namespace {

template <class S>
void validate_diffeo(const Chain<S>& h, const S& tol) {
  using std::abs;
  for (const auto& n : h.nodes())
    if (!n.certified_monotone())
      throw Error(ErrorCode::NotADiffeo, "node parameters outside the monotone range");
  if (abs(h.value(S(0))) > tol || abs(h.value(S(1)) - 1) > tol)
    throw Error(ErrorCode::NotADiffeo, "map does not fix 0 and 1");
  const int n = 1024;
  for (int i = 0; i <= n; ++i)
    if (!(h.derivative(S(i) / n) > 0))
      throw Error(ErrorCode::NotADiffeo, "derivative is not positive on the check grid");
}

// Checks that `iv` tiles [0, L] in `order` and makes adjacent endpoints
// identical.
template <class S>
void check_tiling(std::vector<Interval<S>>& iv, const std::vector<int>& order, const S& L,
                  const S& tol, const char* row) {
  using std::abs;
  S expected = S(0);
  for (std::size_t p = 0; p < order.size(); ++p) {
    Interval<S>& cur = iv[order[p]];
    if (abs(cur.left - expected) > tol)
      throw Error(ErrorCode::InvalidArgument, std::string(row) + " intervals do not tile the domain");
    cur.left = expected;
    if (!(cur.right > cur.left))
      throw Error(ErrorCode::InvalidArgument, std::string(row) + " interval has nonpositive length");
    expected = cur.right;
  }
  if (abs(expected - L) > tol)
    throw Error(ErrorCode::InvalidArgument, std::string(row) + " intervals do not reach the end");
  iv[order.back()].right = L;
}

}  // namespace

template <class S>
Giet<S>::Giet(Combinatorics pi, std::vector<Interval<S>> top, std::vector<Interval<S>> bottom,
              std::vector<Chain<S>> branches, int precision_bits)
    : pi_(std::move(pi)),
      top_(std::move(top)),
      bottom_(std::move(bottom)),
      branch_(std::move(branches)),
      bits_(ScalarTraits<S>::working_bits(precision_bits)),
      tol_(tolerance_for_bits<S>(precision_bits)) {
  const std::size_t d = pi_.d();
  if (top_.size() != d || bottom_.size() != d || branch_.size() != d)
    throw Error(ErrorCode::InvalidArgument, "interval and branch counts must equal d");
  length_ = top_[pi_.top(pi_.d() - 1)].right;
  check_tiling(top_, pi_.top_order(), length_, tol_, "top");
  check_tiling(bottom_, pi_.bottom_order(), length_, tol_, "bottom");
  refresh_cuts();
}

template <class S>
Giet<S> Giet<S>::from_shape_profile(Combinatorics pi, const Vector<S>& lambda_top,
                                    const Vector<S>& log_slopes, std::vector<Chain<S>> profiles,
                                    int precision_bits) {
  using std::abs;
  using std::exp;
  const int d = pi.d();
  if (lambda_top.size() != d || log_slopes.size() != d || static_cast<int>(profiles.size()) != d)
    throw Error(ErrorCode::InvalidArgument, "shape-profile vectors must have length d");
  const S tol = tolerance_for_bits<S>(precision_bits);
  S L = S(0), Lb = S(0);
  std::vector<S> beta(d);
  for (int i = 0; i < d; ++i) {
    if (!(lambda_top[i] > 0)) throw Error(ErrorCode::InvalidArgument, "lengths must be positive");
    beta[i] = lambda_top[i] * exp(log_slopes[i]);
    L += lambda_top[i];
    Lb += beta[i];
  }
  if (abs(L - Lb) > tol)
    throw Error(ErrorCode::InvalidArgument, "bottom lengths do not sum to the top length");
  for (const auto& p : profiles) validate_diffeo(p, tol);

  std::vector<Interval<S>> top(d), bottom(d);
  S u = S(0), v = S(0);
  for (int p = 0; p < d; ++p) {
    int t = pi.top(p), b = pi.bottom(p);
    top[t] = {u, u + lambda_top[t]};
    u = top[t].right;
    bottom[b] = {v, v + beta[b]};
    v = bottom[b].right;
  }
  top[pi.top(d - 1)].right = L;
  bottom[pi.bottom(d - 1)].right = L;
  std::vector<Chain<S>> branches(d);
  for (int i = 0; i < d; ++i) {
    branches[i] = Chain<S>::affine_between(top[i].left, top[i].right, S(0), S(1))
                      .then(profiles[i])
                      .then(Chain<S>::affine_between(S(0), S(1), bottom[i].left, bottom[i].right));
  }
  return Giet(std::move(pi), std::move(top), std::move(bottom), std::move(branches),
              precision_bits);
}

template <class S>
void Giet<S>::refresh_cuts() {
  const int d = pi_.d();
  top_cuts_.resize(d + 1);
  bottom_cuts_.resize(d + 1);
  for (int p = 0; p < d; ++p) {
    top_cuts_[p] = top_[pi_.top(p)].left;
    bottom_cuts_[p] = bottom_[pi_.bottom(p)].left;
  }
  top_cuts_[d] = length_;
  bottom_cuts_[d] = length_;
}

template <class S>
int Giet<S>::locate(const std::vector<S>& cuts, const std::vector<int>& order, const S& x) const {
  using std::abs;
  const int d = pi_.d();
  if (x < -tol_ || x > length_ + tol_)
    throw Error(ErrorCode::InvalidArgument, "point outside the domain");
  auto it = std::upper_bound(cuts.begin() + 1, cuts.begin() + d, x);
  int p = static_cast<int>(it - cuts.begin()) - 1;
  if (p >= 1 && abs(x - cuts[p]) < tol_)
    throw Error(ErrorCode::AtSingularity, "point at a discontinuity", p);
  if (p + 1 <= d - 1 && abs(x - cuts[p + 1]) < tol_)
    throw Error(ErrorCode::AtSingularity, "point at a discontinuity", p + 1);
  return order[p];
}

template <class S>
int Giet<S>::top_label_at(const S& x) const {
  return locate(top_cuts_, pi_.top_order(), x);
}

template <class S>
int Giet<S>::bottom_label_at(const S& x) const {
  return locate(bottom_cuts_, pi_.bottom_order(), x);
}

template <class S>
Vector<S> Giet<S>::lambda_top() const {
  Vector<S> out(d());
  for (int i = 0; i < d(); ++i) out[i] = top_[i].length() / length_;
  return out;
}

template <class S>
Vector<S> Giet<S>::rho() const {
  Vector<S> out(d());
  for (int i = 0; i < d(); ++i) out[i] = bottom_[i].length() / top_[i].length();
  return out;
}

template <class S>
Vector<S> Giet<S>::log_slopes() const {
  using std::log;
  Vector<S> r = rho();
  for (int i = 0; i < d(); ++i) r[i] = log(r[i]);
  return r;
}

template <class S>
Chain<S> Giet<S>::profile(int label) const {
  const auto& t = top_[label];
  const auto& b = bottom_[label];
  return Chain<S>::affine_between(S(0), S(1), t.left, t.right)
      .then(branch_[label])
      .then(Chain<S>::affine_between(b.left, b.right, S(0), S(1)));
}

template <class S>
bool Giet<S>::is_affine() const {
  for (const auto& b : branch_)
    if (!b.is_affine()) return false;
  return true;
}

template <class S>
bool Giet<S>::is_standard() const {
  using std::abs;
  if (!is_affine()) return false;
  for (int i = 0; i < d(); ++i)
    if (abs(bottom_[i].length() - top_[i].length()) > tol_) return false;
  return true;
}

template <class S>
Winner Giet<S>::peek_winner() const {
  using std::abs;
  const int last = pi_.d() - 1;
  S diff = bottom_[pi_.bottom(last)].left - top_[pi_.top(last)].left;
  if (abs(diff) <= tol_)
    throw Error(ErrorCode::NumericalConnection, "last top and bottom intervals have equal length");
  return diff > 0 ? Winner::Top : Winner::Bottom;
}

template <class S>
RauzyMove Giet<S>::rauzy_veech_in_place() {
  const int last = pi_.d() - 1;
  const Winner side = peek_winner();
  RauzyMove move{side, 0, 0};
  if (side == Winner::Top) {
    const int w = pi_.top(last), l = pi_.bottom(last);
    S new_length = bottom_[l].left;
    top_[w].right = new_length;
    branch_[l] = branch_[l].then(branch_[w]);
    S cut = branch_[w].value(new_length);
    S old_right = bottom_[w].right;
    bottom_[w].right = cut;
    bottom_[l] = {cut, old_right};
    pi_.top_wins();
    length_ = new_length;
    move.winner = w;
    move.loser = l;
  } else {
    const int w = pi_.bottom(last), l = pi_.top(last);
    S new_length = top_[l].left;
    bottom_[w].right = new_length;
    S cut = branch_[w].inverse_value(new_length);
    S old_right = top_[w].right;
    top_[w].right = cut;
    top_[l] = {cut, old_right};
    branch_[l] = branch_[w].then(branch_[l]);
    pi_.bottom_wins();
    length_ = new_length;
    move.winner = w;
    move.loser = l;
  }
  refresh_cuts();
  return move;
}

template <class S>
Giet<S> make_standard_iet(const Combinatorics& pi, const Vector<S>& lambda, int precision_bits) {
  const int d = pi.d();
  if (lambda.size() != d) throw Error(ErrorCode::InvalidArgument, "lambda must have length d");
  std::vector<Interval<S>> top(d), bottom(d);
  S u = S(0), v = S(0);
  for (int p = 0; p < d; ++p) {
    int t = pi.top(p), b = pi.bottom(p);
    if (!(lambda[t] > 0)) throw Error(ErrorCode::InvalidArgument, "lengths must be positive");
    top[t] = {u, u + lambda[t]};
    u = top[t].right;
    bottom[b] = {v, v + lambda[b]};
    v = bottom[b].right;
  }
  bottom[pi.bottom(d - 1)].right = u;
  std::vector<Chain<S>> branches(d);
  for (int i = 0; i < d; ++i) branches[i] = Chain<S>::affine(S(1), bottom[i].left - top[i].left);
  return Giet<S>(pi, std::move(top), std::move(bottom), std::move(branches), precision_bits);
}

template <class S>
S apply(const Giet<S>& T, const S& x, Direction direction) {
  if (direction == Direction::Forward) return T.branch(T.top_label_at(x)).value(x);
  return T.branch(T.bottom_label_at(x)).inverse_value(x);
}

template <class S>
S nonlinearity(const Giet<S>& T, const S& x) {
  Jet<S> j = T.branch(T.top_label_at(x)).jet(x);
  return j.d2 / j.d1;
}

template <class S>
S integrated_nonlinearity(const Chain<S>& f, const S& lo, const S& hi, bool absolute) {
  const S width = hi - lo;
  const double w = to_double(width);
  auto eta = [&](double s) {
    Jet<S> j = f.jet(lo + S(s) * width);
    return to_double(S(j.d2 / j.d1)) * w;
  };
  auto integrate = [&](double a, double b) {
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(eta, a, b, 8, 1e-13, &err);
  };
  if (!absolute) return S(integrate(0.0, 1.0));
  // |eta| has kinks at the zeros of eta; integrate the smooth pieces between them.
  const int grid = 128;
  std::vector<double> cuts{0.0};
  double prev = eta(0.0);
  for (int i = 1; i <= grid; ++i) {
    const double x = static_cast<double>(i) / grid;
    const double cur = eta(x);
    if ((prev < 0) != (cur < 0)) {
      double a = static_cast<double>(i - 1) / grid, b = x;
      const bool negative_left = prev < 0;
      for (int k = 0; k < 50; ++k) {
        const double m = (a + b) / 2;
        ((eta(m) < 0) == negative_left ? a : b) = m;
      }
      cuts.push_back((a + b) / 2);
    }
    prev = cur;
  }
  cuts.push_back(1.0);
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += std::abs(integrate(cuts[i], cuts[i + 1]));
  return S(total);
}

template <class S>
S total_nonlinearity(const Giet<S>& T) {
  S total = S(0);
  for (int i = 0; i < T.d(); ++i) {
    if (T.branch(i).is_affine()) continue;
    total += integrated_nonlinearity(T.branch(i), T.top_interval(i).left,
                                     T.top_interval(i).right, true);
  }
  return total;
}

template <class S>
Vector<S> boundary(const Giet<S>& T) {
  const auto& pi = T.combinatorics();
  const int d = pi.d();
  SingularityStructure sing = singularity_structure(pi);
  Vector<S> out = Vector<S>::Zero(sing.kappa);
  for (int i = 0; i <= d; ++i) {
    S jump = S(0);
    if (i < d) {
      int label = pi.top(i);
      jump += T.branch(label).log_derivative(T.top_interval(label).left);
    }
    if (i > 0) {
      int label = pi.top(i - 1);
      jump -= T.branch(label).log_derivative(T.top_interval(label).right);
    }
    out[sing.assignment[i]] += jump;
  }
  return out;
}

template <class S>
S c2_grid_distance(const Chain<S>& f, const Chain<S>& g) {
  using std::abs;
  using std::max;
  auto gap = [&](const S& s) {
    Jet<S> a = f.jet(s), b = g.jet(s);
    return max(abs(a.value - b.value), max(abs(a.d1 - b.d1), abs(a.d2 - b.d2)));
  };
  long n = 1024;
  S est = S(0);
  for (long i = 0; i <= n; ++i) est = max(est, gap(S(i) / n));
  while (n < (1L << 16)) {
    long n2 = 2 * n;
    S refined = est;
    for (long i = 1; i < n2; i += 2) refined = max(refined, gap(S(i) / n2));
    n = n2;
    bool settled = refined == 0 || abs(refined - est) <= refined * S(1e-6);
    est = refined;
    if (settled) break;
  }
  return est;
}

template <class S>
S c2_distance(const Giet<S>& T1, const Giet<S>& T2) {
  using std::abs;
  using std::max;
  if (!(T1.combinatorics() == T2.combinatorics())) return infinity<S>();
  Vector<S> l1 = T1.lambda_top(), l2 = T2.lambda_top(), r1 = T1.rho(), r2 = T2.rho();
  S dl = S(0), dr = S(0), dp = S(0);
  for (int i = 0; i < T1.d(); ++i) {
    dl = max(dl, S(abs(l1[i] - l2[i])));
    dr = max(dr, S(abs(r1[i] - r2[i])));
    dp = max(dp, c2_grid_distance(T1.profile(i), T2.profile(i)));
  }
  return dl + dr + dp;
}

template <class S>
S c2_distance_to_iets(const Giet<S>& T) {
  using std::abs;
  using std::max;
  Vector<S> r = T.rho();
  S dr = S(0), dp = S(0);
  for (int i = 0; i < T.d(); ++i) {
    dr = max(dr, S(abs(r[i] - 1)));
    Chain<S> p = T.profile(i);
    if (!p.is_identity()) dp = max(dp, c2_grid_distance(p, Chain<S>::identity()));
  }
  return dr + dp;
}

template <class S>
Giet<S> conjugate_by_diffeo(const Giet<S>& T0, const Chain<S>& h) {
  using std::abs;
  if (!T0.is_standard())
    throw Error(ErrorCode::InvalidArgument, "conjugation expects a standard IET");
  if (abs(T0.length() - 1) > T0.tolerance())
    throw Error(ErrorCode::InvalidArgument, "conjugation expects an IET on [0,1]");
  validate_diffeo(h, T0.tolerance());
  const int d = T0.d();
  Chain<S> hinv = h.inverse();
  auto image = [&](const S& x) {
    if (x == 0) return S(0);
    if (x == T0.length()) return S(1);
    return h.value(x);
  };
  std::vector<Interval<S>> top(d), bottom(d);
  std::vector<Chain<S>> branches(d);
  for (int i = 0; i < d; ++i) {
    top[i] = {image(T0.top_interval(i).left), image(T0.top_interval(i).right)};
    bottom[i] = {image(T0.bottom_interval(i).left), image(T0.bottom_interval(i).right)};
    branches[i] = hinv.then(T0.branch(i)).then(h);
  }
  return Giet<S>(T0.combinatorics(), std::move(top), std::move(bottom), std::move(branches),
                 T0.precision_bits());
}

template <class S>
Giet<S> rescaled(const Giet<S>& T, const S& new_length) {
  const S r = new_length / T.length();
  const int d = T.d();
  std::vector<Interval<S>> top(d), bottom(d);
  std::vector<Chain<S>> branches(d);
  Chain<S> down = Chain<S>::affine(1 / r, S(0)), up = Chain<S>::affine(r, S(0));
  for (int i = 0; i < d; ++i) {
    top[i] = {T.top_interval(i).left * r, T.top_interval(i).right * r};
    bottom[i] = {T.bottom_interval(i).left * r, T.bottom_interval(i).right * r};
    branches[i] = down.then(T.branch(i)).then(up);
  }
  top[T.combinatorics().top(d - 1)].right = new_length;
  bottom[T.combinatorics().bottom(d - 1)].right = new_length;
  return Giet<S>(T.combinatorics(), std::move(top), std::move(bottom), std::move(branches),
                 T.precision_bits());
}

template <class S>
KeaneReport keane_probe(const Giet<S>& T, long steps) {
  KeaneReport report;
  Giet<S> map = T;
  for (long s = 1; s <= steps; ++s) {
    try {
      map.rauzy_veech_in_place();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalConnection) throw;
      report.near_connection_step = s;
      return report;
    }
    report.steps_completed = s;
    for (int i = 0; i < map.d(); ++i) {
      if (map.top_interval(i).length() < map.tolerance() ||
          map.bottom_interval(i).length() < map.tolerance()) {
        report.near_connection_step = s;
        return report;
      }
    }
  }
  report.survived = true;
  return report;
}

#define GIETLAB_INSTANTIATE(S)                                                             \
  template class Giet<S>;                                                                  \
  template Giet<S> make_standard_iet<S>(const Combinatorics&, const Vector<S>&, int);      \
  template S apply<S>(const Giet<S>&, const S&, Direction);                                \
  template S nonlinearity<S>(const Giet<S>&, const S&);                                    \
  template S integrated_nonlinearity<S>(const Chain<S>&, const S&, const S&, bool);        \
  template S total_nonlinearity<S>(const Giet<S>&);                                        \
  template Vector<S> boundary<S>(const Giet<S>&);                                          \
  template S c2_grid_distance<S>(const Chain<S>&, const Chain<S>&);                        \
  template S c2_distance<S>(const Giet<S>&, const Giet<S>&);                               \
  template S c2_distance_to_iets<S>(const Giet<S>&);                                       \
  template Giet<S> conjugate_by_diffeo<S>(const Giet<S>&, const Chain<S>&);                \
  template Giet<S> rescaled<S>(const Giet<S>&, const S&);                                  \
  template KeaneReport keane_probe<S>(const Giet<S>&, long);

GIETLAB_INSTANTIATE(double)
GIETLAB_INSTANTIATE(Real)

}  // namespace gietlab
