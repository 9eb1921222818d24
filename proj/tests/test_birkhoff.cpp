#include <doctest.h>

#include "common.hpp"

using namespace testing;

namespace {

struct Fixture {
  Giet<Real> T0, T;
  InductionChain<Real> chain;
  TowerHierarchy<Real> hierarchy;
  SpecialSums<Real> sums;

  Fixture(Giet<Real> base, int depth, Acceleration kind = Acceleration::Positive)
      : T0(base), T(conjugated(base)), chain(T, kind), hierarchy((chain.extend_to(depth), chain)),
        sums(hierarchy, Observable<Real>::log_derivative(T)) {}
};

}  // namespace

TEST_CASE("Birkhoff sums: trivial cases") {
  auto T0 = golden_iet();
  auto T = conjugated(T0);
  auto f = Observable<Real>::log_derivative(T);
  CHECK(birkhoff_sum(T, f, Real("0.3"), 0) == 0);
  std::mt19937_64 rng(31);
  auto R = random_iet(reversal(4), rng);
  auto g = Observable<Real>::log_derivative(R);
  for (long long n : {1LL, 17LL, -40LL, 500LL}) CHECK(birkhoff_sum(R, g, Real("0.37"), n) == 0);
}

TEST_CASE("Birkhoff sums: cocycle and reflection") {
  std::mt19937_64 rng(32);
  auto T = conjugated(random_iet(reversal(4), rng));
  auto f = Observable<Real>::log_derivative(T);
  std::uniform_int_distribution<long long> len(0, 500);
  for (int trial = 0; trial < 1000; ++trial) {
    Real x = uniform(rng, 0.001, 0.999);
    long long n = len(rng) % 60, m = len(rng) % 60;
    if (trial < 20) {
      n = len(rng);
      m = len(rng);
    }
    Real Tn = x;
    for (long long i = 0; i < n; ++i) Tn = apply(T, Tn);
    Real lhs = birkhoff_sum(T, f, x, n + m);
    Real rhs = birkhoff_sum(T, f, x, n) + birkhoff_sum(T, f, Tn, m);
    CHECK(abs(lhs - rhs) < Real("1e-60"));
    // Reflection through the backward sum.
    CHECK(abs(birkhoff_sum(T, f, Tn, -n) - birkhoff_sum(T, f, x, n)) < Real("1e-60"));
  }
}

TEST_CASE("Birkhoff sums agree with the telescoping oracle") {
  auto T0 = golden_iet();
  auto T = conjugated(T0);
  auto o = oracle_conjugated(T0);
  auto f = Observable<Real>::log_derivative(T);
  std::mt19937_64 rng(33);
  for (int i = 0; i < 50; ++i) {
    Real x = uniform(rng, 0.001, 0.999);
    long long r = 1 + static_cast<long long>(rng() % 2000);
    CHECK(abs(birkhoff_sum(T, f, x, r) - o.birkhoff(x, r)) < Real("1e-50"));
  }
}

TEST_CASE("special sums: level 0 and direct iteration") {
  std::mt19937_64 rng(34);
  Fixture fx(random_iet(reversal(4), rng), 6, Acceleration::Zorich);
  const auto& H = fx.hierarchy;
  auto f = Observable<Real>::log_derivative(fx.T);
  SpecialSums<Real> recursive(H, f, false);
  for (int j = 0; j < 4; ++j) {
    Real x = fx.T.top_interval(j).midpoint();
    CHECK(fx.sums(0, j, x) == f(j, x));
  }
  for (int k = 1; k <= 6; ++k)
    for (int j = 0; j < 4; ++j) {
      const auto& base = fx.chain.level(k).top_interval(j);
      for (int s = 0; s < 20; ++s) {
        Real x = base.left + (base.right - base.left) * Real(2 * s + 1) / 40;
        Real direct = birkhoff_sum(fx.T, f, x, H.height(k, j));
        CHECK(abs(recursive(k, j, x) - direct) <= Real("1e-50"));
        CHECK(abs(fx.sums(k, j, x) - direct) <= Real("1e-50"));
        CHECK(abs(fx.sums.from_level_below(k, j, x) - direct) <= Real("1e-50"));
      }
      Real x = base.midpoint();
      long long m = H.height(k, j) / 2;
      CHECK(abs(fx.sums.partial(k, j, x, m) - birkhoff_sum(fx.T, f, x, m)) <= Real("1e-50"));
    }
}

TEST_CASE("special sums vanish for IETs and decay for conjugates") {
  InductionChain<Real> chain(golden_iet());
  chain.extend_to(3);
  TowerHierarchy<Real> H(chain);
  SpecialSums<Real> zero(H, Observable<Real>::log_derivative(golden_iet()));
  for (int k = 0; k <= 3; ++k) CHECK(zero.sup_norm(k) == 0);

  Fixture fx(golden_iet(), 10);
  std::vector<double> logs;
  for (int k = 2; k <= 10; ++k) logs.push_back(to_double(log(special_sums(fx.sums, k).sup_norm)));
  auto fit = growth_fit(logs);
  CHECK(fit.slope < 0);
  CHECK(fit.r2 > 0.9);
}

TEST_CASE("geometric decomposition") {
  for (int d : {2, 4}) {
    std::mt19937_64 rng(35 + d);
    Fixture fx(d == 2 ? golden_iet() : random_iet(reversal(4), rng), d == 2 ? 10 : 6);
    auto o = oracle_conjugated(fx.T0);
    const auto& H = fx.hierarchy;
    for (int i = 0; i < 100; ++i) {
      Real x = uniform(rng, 0.001, 0.999);
      long long r = 1 + static_cast<long long>(rng() % 10'000);
      auto g = geometric_decomposition(fx.sums, x, r);
      Real exact = o.birkhoff(x, r);
      CHECK(abs(g.total - exact) < Real("1e-40"));
      CHECK(abs(exact) <= g.bound);
      Real sum = 0;
      for (const auto& t : g.terms) sum += t.value;
      CHECK(abs(sum - g.total) < Real("1e-60"));
      for (const auto* counts : {&g.forward_counts, &g.backward_counts})
        for (std::size_t n = 0; n < counts->size(); ++n)
          CHECK(BigInt((*counts)[n]) <= matrix_norm(H.chain().matrix(static_cast<int>(n))));
    }
  }
}

TEST_CASE("shallow decomposition uses one level") {
  Fixture fx(golden_iet(), 6);
  const auto& H = fx.hierarchy;
  const auto& base = fx.chain.level(1).top_interval(0);
  long long r = std::min(H.height(1, 0), H.height(1, 1)) - 1;
  auto g = geometric_decomposition(fx.sums, base.midpoint(), r);
  CHECK(g.deepest_level == 0);
  for (const auto& t : g.terms) CHECK(t.level == 0);
  CHECK(BigInt(static_cast<long long>(g.terms.size())) <= matrix_norm(fx.chain.matrix(0)));
  auto f = Observable<Real>::log_derivative(fx.T);
  CHECK(abs(g.total - birkhoff_sum(fx.T, f, base.midpoint(), r)) < Real("1e-60"));
}

TEST_CASE("broken sums") {
  Fixture fx(golden_iet(), 6);
  const auto& H = fx.hierarchy;
  for (int k = 1; k <= 5; ++k)
    for (int j = 0; j < 2; ++j) {
      const auto& base = fx.chain.level(k).top_interval(j);
      Real x = base.left + (base.right - base.left) / 3;
      Real y = base.left + 2 * (base.right - base.left) / 3;
      for (long long m = 0; m < H.height(k, j); m += 1 + H.height(k, j) / 7) {
        CHECK(abs(broken_sum(fx.sums, {k, j, x, x, m}) - fx.sums(k, j, x)) < Real("1e-60"));
        Real b = broken_sum(fx.sums, {k, j, x, y, m});
        Real direct = fx.sums.partial(k, j, x, m) + fx.sums(k, j, y) - fx.sums.partial(k, j, y, m);
        CHECK(abs(b - direct) < Real("1e-60"));
        // The raw variants add f at the return point; the one-step shifts differ by one term.
        Real defined = broken_sum(fx.sums, {k, j, x, y, m}, BrokenConvention::AsDefined);
        Real ret = H.jump(k, j, y);
        auto f = fx.sums.observable();
        CHECK(abs(defined - b - f(fx.T.top_label_at(ret), ret)) < Real("1e-60"));
      }
      auto est = broken_sup_estimate(fx.sums, k, j);
      CHECK(est.gap >= 0);
      CHECK(est.abs_sup >= abs(fx.sums(k, j, base.midpoint())) - Real("1e-60"));
    }
  try {
    broken_sum(fx.sums, {1, 0, Real(0), Real(0), H.height(1, 0)});
    FAIL("range not checked");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RangeError);
  }

  InductionChain<Real> chain(golden_iet());
  chain.extend_to(4);
  TowerHierarchy<Real> G(chain);
  SpecialSums<Real> zero(G, Observable<Real>::log_derivative(golden_iet()));
  for (int k = 1; k <= 3; ++k) {
    auto est = broken_sup_estimate(zero, k, 0);
    CHECK(est.abs_sup == 0);
    CHECK(est.gap == 0);
  }
}

TEST_CASE("broken sum gap decreases for a conjugate") {
  Fixture fx(golden_iet(), 8);
  Real prev = infinity<Real>();
  for (int k = 3; k <= 8; ++k) {
    Real gap = 0;
    for (int j = 0; j < 2; ++j) gap = rmax(gap, broken_sup_estimate(fx.sums, k, j).gap);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("decay CSV") {
  std::vector<io::DecayRow> rows{{2, Real("0.5"), {Real("0.1"), Real("0.2")}, Real(3)}, {3, Real("0.25"), {Real("0.05"), Real("0.1")}, Real("1.5")}};
  auto csv = io::decay_csv(rows, 2);
  CHECK(csv.rfind("k,sup_norm_fk,broken_sup_1,broken_sup_2,bound\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
