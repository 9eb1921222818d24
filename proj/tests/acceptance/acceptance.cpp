// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include "common.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace testing;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

BigInt entry_sum(const IntegerMatrix& A) {
  BigInt s = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) s += A(i, j);
  return s;
}

// Random irreducible pair of orders for d labels.
Combinatorics random_combinatorics(int d, std::mt19937_64& rng) {
  for (;;) {
    std::vector<int> top(d), bottom(d);
    for (int i = 0; i < d; ++i) top[i] = bottom[i] = i;
    std::shuffle(bottom.begin(), bottom.end(), rng);
    try {
      return validate_combinatorics(top, bottom);
    } catch (const Error&) {
    }
  }
}

Giet<Real> random_map(int d, std::mt19937_64& rng) { return random_iet(random_combinatorics(d, rng), rng); }

// Criteria 5 to 8 share this input: the golden rotation conjugated by the
// test diffeo, positive acceleration to depth 10.
struct Conjugate {
  Giet<Real> T0 = golden_iet();
  Giet<Real> T = conjugated(T0);
  InductionChain<Real> chain{T}, model{T0};
  TowerHierarchy<Real> hierarchy{(chain.extend_to(10), model.extend_to(10), chain)};
  SpecialSums<Real> sums{hierarchy, Observable<Real>::log_derivative(T)};
};

Conjugate& conjugate() {
  static Conjugate c;
  return c;
}

Verdict continued_fractions() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  int matched = 0;
  for (int i = 0; i < 50; ++i) {
    Real a = random_unit(rng, 256);
    auto T = rotation(a);
    auto runs = zorich_runs(T, 15);
    auto cf = oracle::continued_fraction(a, 1 - a, 15);
    bool ok = cf.size() == 15;
    for (int n = 0; ok && n < 15; ++n) ok = BigInt(runs[n]) == cf[n];
    matched += ok;
  }
  double s = seconds_since(t0);
  return {matched == 50 && s < 10, std::to_string(matched) + "/50 rotations match 15 quotients in " + fmt(s) + " s (limit 10 s)"};
}

std::vector<Giet<Real>>& height_inputs() {
  static std::vector<Giet<Real>> maps = [] {
    std::vector<Giet<Real>> out;
    std::mt19937_64 rng(202);
    for (int i = 0; i < 20; ++i) out.push_back(random_map(3 + i % 3, rng));
    return out;
  }();
  return maps;
}

Verdict heights() {
  auto t0 = Clock::now();
  long long checked = 0, wrong = 0;
  for (const auto& T : height_inputs()) {
    auto o = oracle_of(T);
    for (auto kind : {Acceleration::Zorich, Acceleration::Positive}) {
      InductionChain<Real> chain(T, kind);
      for (int k = 0;; ++k) {
        try {
          chain.extend_to(k);
        } catch (const Error&) {
          break;
        }
        if (chain.heights(k).maxCoeff() > 100'000) break;
        const auto& level = chain.level(k);
        for (int j = 0; j < T.d(); ++j) {
          long long t = oracle::return_time(o, level.top_interval(j).midpoint(), level.length(), 200'000);
          ++checked;
          wrong += BigInt(t) != chain.heights(k)[j];
        }
      }
    }
  }
  double s = seconds_since(t0);
  return {wrong == 0 && checked > 0 && s < 60,
          std::to_string(checked - wrong) + "/" + std::to_string(checked) +
              " heights equal brute-force return times in " + fmt(s) + " s (limit 60 s)"};
}

Verdict cocycle() {
  long long checked = 0, wrong = 0;
  for (const auto& T : height_inputs()) {
    InductionChain<Real> chain(T, Acceleration::Zorich);
    chain.extend_to(8);
    for (int m = 0; m <= 8; ++m)
      for (int n = m + 1; n <= 8; ++n)
        for (int p = n + 1; p <= 8; ++p) {
          ++checked;
          wrong += !(cocycle_product(chain, m, p) ==
                     oracle::multiply(cocycle_product(chain, n, p), cocycle_product(chain, m, n)));
        }
  }
  return {wrong == 0, std::to_string(checked - wrong) + "/" + std::to_string(checked) +
                          " triples m < n < p <= 8 satisfy Q(m,p) = Q(n,p) Q(m,n) exactly"};
}

Verdict decomposition() {
  auto t0 = Clock::now();
  Real worst = 0;
  long long violations = 0, runs = 0;
  std::mt19937_64 map_rng(404), rng(405);
  for (int d : {2, 4}) {
    auto T0 = d == 2 ? golden_iet() : random_iet(reversal(4), map_rng);
    auto T = conjugated(T0);
    auto o = oracle_conjugated(T0);
    InductionChain<Real> chain(T);
    // Level-2 heights already exceed 10^4 for the d = 4 input.
    chain.extend_to(d == 2 ? 10 : 4);
    TowerHierarchy<Real> H(chain);
    SpecialSums<Real> sums(H, Observable<Real>::log_derivative(T));
    for (int i = 0; i < 100; ++i) {
      Real x = uniform(rng, 0.001, 0.999);
      long long r = 1 + static_cast<long long>(rng() % 10'000);
      auto g = geometric_decomposition(sums, x, r);
      Real direct = birkhoff_sum(T, sums.observable(), x, r);
      worst = rmax(worst, abs(g.total - direct));
      worst = rmax(worst, abs(g.total - o.birkhoff(x, r)));
      violations += abs(direct) > g.bound;
      ++runs;
    }
  }
  return {worst < Real("1e-40") && violations == 0,
          std::to_string(runs) + " decompositions, max error " + fmt(to_double(worst), 3) +
              " (limit 1e-40), bound violations " + std::to_string(violations) + " in " + fmt(seconds_since(t0)) + " s"};
}

Verdict sbs_decay() {
  auto t0 = Clock::now();
  auto& c = conjugate();
  std::vector<double> ks, logs;
  bool c2_decreasing = true;
  double prev = 0;
  for (int k = 2; k <= 10; ++k) {
    ks.push_back(k);
    logs.push_back(std::log(to_double(c.sums.sup_norm(k))));
    double c2 = to_double(c2_distance_to_iets(renormalized_map(c.chain, k)));
    if (k > 2 && !(c2 < prev)) c2_decreasing = false;
    prev = c2;
  }
  auto fit = ols_fit(ks, logs);
  double s = seconds_since(t0);
  return {fit.slope < 0 && fit.r2 >= 0.9 && c2_decreasing && s < 300,
          "slope " + fmt(fit.slope) + ", r2 " + fmt(fit.r2, 5) + " (need < 0 and >= 0.9), C2 distance " +
              (c2_decreasing ? "decreasing" : "not decreasing") + " on [2,10], " + fmt(s) + " s (limit 300 s)"};
}

Verdict broken_decay() {
  auto& c = conjugate();
  std::vector<double> gaps;
  for (int k = 3; k <= 8; ++k) {
    Real g = 0;
    for (int j = 0; j < 2; ++j) g = rmax(g, broken_sup_estimate(c.sums, k, j).gap);
    gaps.push_back(to_double(g));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];
  std::string series;
  for (double g : gaps) series += (series.empty() ? "" : ", ") + fmt(g, 3);
  return {decreasing, "max-over-towers gap on [3,8]: " + series};
}

Verdict certificates() {
  auto& c = conjugate();
  const auto& H = c.hierarchy;
  CertificateVerifier<Real> verifier(c.chain);
  auto o = oracle_of(c.T0);
  oracle::BaseOrbit base{&o};
  oracle::SineMap h{epsilon()};
  // Raw orbit of 0 under T is h(T0^t 0); count its visits to [0, |I_k|).
  auto visits = [&](int k, long long from, long long to) {
    const Real top = c.chain.inducing_length(k) - c.T.tolerance();
    long long n = 0;
    for (long long t = from; t < to; ++t) n += h.value(base.at(t)) < top;
    return n;
  };
  long long made = 0, violations = 0, mismatches = 0;
  auto certify = [&](const Real& x, const Real& y) {
    int k0 = scale_of_pair(H, x, y).k0;
    auto cert = single_orbit_approximation(H, x, y, std::min(k0 + 2, 5));
    auto audit = verifier.audit(cert);
    violations += audit.bound_violations;
    mismatches += audit.mismatches;
    const long long lo = std::min(cert.xs[0].index, cert.ys[0].index);
    const long long hi = std::max(cert.xs[0].index, cert.ys[0].index);
    long long bridge = visits(cert.k0 - 1, lo, hi);
    mismatches += bridge != cert.bridge_count;
    violations += BigInt(bridge) > 2 * entry_sum(c.chain.matrix(cert.k0 - 1)) * entry_sum(c.chain.matrix(cert.k0));
    for (std::size_t s = 0; s + 1 < cert.xs.size(); ++s) {
      const int k = cert.k0 + static_cast<int>(s);
      const BigInt bound = 2 * entry_sum(c.chain.matrix(k)) * entry_sum(c.chain.matrix(k + 1));
      for (const auto* seq : {&cert.xs, &cert.ys}) {
        long long n = visits(k, (*seq)[s].index, (*seq)[s + 1].index);
        violations += BigInt(n) > bound;
      }
      mismatches += visits(k, cert.xs[s].index, cert.xs[s + 1].index) != cert.x_counts[s];
      mismatches += visits(k, cert.ys[s].index, cert.ys[s + 1].index) != cert.y_counts[s];
    }
    ++made;
  };
  int pairs = 0;
  for (const auto& p : sample_pairs(100, 707, 2)) {
    ++pairs;
    auto scale = scale_of_pair(H, p.x, p.y);
    if (scale.covering == Covering::OneFloor) {
      certify(p.x, p.y);
    } else {
      // Split at the shared floor endpoint into two one-floor problems.
      const Real& f = scale.shared_endpoint;
      certify(p.x, (p.x + f) / 2);
      certify((f + p.y) / 2, p.y);
    }
  }
  return {violations == 0 && mismatches == 0 && made >= 100,
          std::to_string(made) + " certificates from " + std::to_string(pairs) + " pairs, " +
              std::to_string(violations) + " bound violations, " + std::to_string(mismatches) +
              " recount mismatches"};
}

Verdict holder() {
  auto& c = conjugate();
  HolderOptions opt;
  opt.workers = 4;
  auto small = holder_fit(c.sums, c.model, sample_pairs(400, 808), opt);
  auto large = holder_fit(c.sums, c.model, sample_pairs(800, 808), opt);
  auto in_unit = [](double v) { return v > 0 && v < 1; };
  bool lambdas = in_unit(small.lambda1) && in_unit(small.lambda2) && in_unit(large.lambda1) && in_unit(large.lambda2);
  double change = std::abs(large.holder_constant - small.holder_constant) / small.holder_constant;
  bool finite = std::isfinite(small.holder_constant) && std::isfinite(large.holder_constant) && small.alpha && large.alpha;

  InductionChain<Real> flat(c.T0);
  flat.extend_to(8);
  TowerHierarchy<Real> FH(flat);
  SpecialSums<Real> zero(FH, Observable<Real>::log_derivative(c.T0));
  auto degenerate = holder_fit(zero, c.model, sample_pairs(100, 808), opt);

  return {lambdas && finite && change < 0.2 && degenerate.affine_degenerate,
          "400 pairs: l1 " + fmt(small.lambda1) + " l2 " + fmt(small.lambda2) + " C " + fmt(small.holder_constant) +
              "; 800 pairs: l1 " + fmt(large.lambda1) + " l2 " + fmt(large.lambda2) + " C " +
              fmt(large.holder_constant) + "; change " + fmt(100 * change, 3) + "% (limit 20%); T = T0 " +
              (degenerate.affine_degenerate ? "affine-degenerate" : "not flagged")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / ("gietlab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  int identical = 0, compared = 0, orphans = 0, scenarios = 0;
  for (const auto& entry : fs::directory_iterator(GIETLAB_SCENARIOS)) {
    if (entry.path().extension() != ".ini") continue;
    ++scenarios;
    std::vector<fs::path> dirs;
    for (int run = 0; run < 2; ++run) {
      auto config = load_config(entry.path());
      config.output = root / (entry.path().stem().string() + "_" + std::to_string(run));
      run_scenario(config);
      dirs.push_back(config.output);
    }
    auto manifest = nlohmann::json::parse(slurp(dirs[0] / "manifest.json"));
    std::set<std::string> listed{"manifest.json"};
    for (const auto& f : manifest["files"]) listed.insert(f["path"].get<std::string>());
    for (const auto& dir : dirs)
      for (const auto& f : fs::directory_iterator(dir)) orphans += !listed.count(f.path().filename().string());
    for (const auto& name : listed) {
      ++compared;
      identical += slurp(dirs[0] / name) == slurp(dirs[1] / name);
    }
  }
  fs::remove_all(root);
  return {identical == compared && orphans == 0 && scenarios >= 5,
          std::to_string(identical) + "/" + std::to_string(compared) + " files byte-identical across reruns of " +
              std::to_string(scenarios) + " scenarios, " + std::to_string(orphans) + " orphan files"};
}

}  // namespace

int main() {
  PrecisionScope scope(256);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"continued fractions", continued_fractions},
      {"heights vs return times", heights},
      {"cocycle relation", cocycle},
      {"geometric decomposition", decomposition},
      {"special sum decay", sbs_decay},
      {"broken sum decay", broken_decay},
      {"approximation certificates", certificates},
      {"Holder fit", holder},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
