#include "gietlab/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/version.hpp>
#include <gmp.h>
#include <mpfr.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#ifndef GIETLAB_VERSION
#define GIETLAB_VERSION "0.0.0"
#endif

namespace gietlab {

using nlohmann::json;

namespace {

Error config_error(const std::string& message) { return Error(ErrorCode::ConfigError, message); }

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  if (!(is >> v) || !(is >> std::ws).eof()) throw config_error("'" + key + "' is not a number: " + text);
  return v;
}

std::vector<int> parse_ints(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  std::vector<int> out;
  std::string tok;
  while (is >> tok) {
    std::replace(tok.begin(), tok.end(), ',', ' ');
    std::istringstream t(tok);
    int v;
    while (t >> v) out.push_back(v);
  }
  if (out.empty()) throw config_error("'" + key + "' needs a list of labels");
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

Acceleration acceleration_kind(const std::string& name) {
  if (name == "rv") return Acceleration::RauzyVeech;
  if (name == "zorich") return Acceleration::Zorich;
  if (name == "positive") return Acceleration::Positive;
  throw config_error("unknown acceleration '" + name + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- config

ScenarioConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw config_error(std::string("malformed config: ") + e.message());
  }
  static const std::map<std::string, std::set<std::string>> known = {
      {"scenario", {"name", "seed", "precision_bits", "workers", "output"}},
      {"giet", {"file", "model", "top", "bottom", "lambda", "conjugacy", "acceleration"}},
      {"budgets", {"depth", "first_level", "floor_cap", "orbit_cap"}},
      {"samples", {"count", "refinement", "min_pairs_per_level"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw config_error("unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw config_error("unknown key '" + section + "." + key + "'");
  }
  auto get = [&](const std::string& path) { return tree.get_optional<std::string>(pt::ptree::path_type(path, '/')); };

  ScenarioConfig c;
  if (auto v = get("scenario/name")) c.scenario = *v;
  else throw config_error("missing scenario.name");
  if (auto v = get("scenario/seed")) c.seed = parse_number<std::uint64_t>("seed", *v);
  if (auto v = get("scenario/precision_bits")) c.precision_bits = parse_number<int>("precision_bits", *v);
  if (auto v = get("scenario/workers")) c.workers = parse_number<int>("workers", *v);
  if (auto v = get("scenario/output")) c.output = *v;
  if (auto v = get("giet/file")) c.giet.file = *v;
  if (auto v = get("giet/model")) c.giet.model_file = *v;
  if (auto v = get("giet/top")) c.giet.top = parse_ints("top", *v);
  if (auto v = get("giet/bottom")) c.giet.bottom = parse_ints("bottom", *v);
  if (auto v = get("giet/lambda")) c.giet.lambda = *v;
  if (auto v = get("giet/conjugacy")) c.giet.conjugacy = *v;
  if (auto v = get("giet/acceleration")) c.acceleration = *v;
  if (auto v = get("budgets/depth")) c.depth = parse_number<int>("depth", *v);
  if (auto v = get("budgets/first_level")) c.first_level = parse_number<int>("first_level", *v);
  if (auto v = get("budgets/floor_cap")) c.floor_cap = parse_number<long long>("floor_cap", *v);
  if (auto v = get("budgets/orbit_cap")) c.orbit_cap = parse_number<long long>("orbit_cap", *v);
  if (auto v = get("samples/count")) c.samples = parse_number<int>("count", *v);
  if (auto v = get("samples/refinement")) c.refinement = parse_number<int>("refinement", *v);
  if (auto v = get("samples/min_pairs_per_level"))
    c.min_pairs_per_level = parse_number<int>("min_pairs_per_level", *v);

  if (c.precision_bits < 64) throw config_error("precision_bits must be at least 64");
  if (c.workers < 1 || c.depth < 1 || c.floor_cap < 1 || c.orbit_cap < 1 || c.samples < 1 ||
      c.refinement < 1 || c.min_pairs_per_level < 1)
    throw config_error("budgets must be positive");
  if (c.first_level < 0 || c.first_level > c.depth) throw config_error("first_level must lie in [0, depth]");
  acceleration_kind(c.acceleration);
  if (c.giet.top.size() != c.giet.bottom.size()) throw config_error("top and bottom differ in length");
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config " + path.string());
  return parse_config(in);
}

std::string canonical_config(const ScenarioConfig& c) {
  std::map<std::string, std::string> kv = {
      {"budgets.depth", std::to_string(c.depth)},
      {"budgets.first_level", std::to_string(c.first_level)},
      {"budgets.floor_cap", std::to_string(c.floor_cap)},
      {"budgets.orbit_cap", std::to_string(c.orbit_cap)},
      {"giet.acceleration", c.acceleration},
      {"giet.bottom", join_ints(c.giet.bottom)},
      {"giet.conjugacy", c.giet.conjugacy},
      {"giet.file", c.giet.file},
      {"giet.lambda", c.giet.lambda},
      {"giet.model", c.giet.model_file},
      {"giet.top", join_ints(c.giet.top)},
      {"samples.count", std::to_string(c.samples)},
      {"samples.min_pairs_per_level", std::to_string(c.min_pairs_per_level)},
      {"samples.refinement", std::to_string(c.refinement)},
      {"scenario.name", c.scenario},
      {"scenario.precision_bits", std::to_string(c.precision_bits)},
      {"scenario.seed", std::to_string(c.seed)},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InvalidArgument, "SHA-256 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

json version_info() {
  return {{"gietlab", GIETLAB_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"mpfr", mpfr_get_version()},
          {"gmp", gmp_version}};
}

// ---------------------------------------------------------------- inputs

Real random_unit(std::mt19937_64& rng, int bits) {
  Real x = 0;
  int have = 0;
  while (have < bits) {
    have += 53;
    x += ldexp(Real(static_cast<double>(rng() >> 11)), -have);
  }
  return x;
}

double random_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::vector<SamplePair<Real>> sample_pairs(int count, std::uint64_t seed, double decades) {
  std::mt19937_64 rng(seed);
  std::vector<SamplePair<Real>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    double x = 0.01 + 0.98 * random_double(rng);
    double gap = std::pow(10.0, -0.5 - decades * random_double(rng));
    double y = x + gap < 0.99 ? x + gap : x - gap;
    out.push_back({Real(std::min(x, y)), Real(std::max(x, y))});
  }
  return out;
}

Chain<Real> parse_conjugacy(const std::string& text) {
  std::vector<Node<Real>> nodes;
  for (const auto& part : split(text, ';')) {
    std::istringstream is(part);
    std::string family;
    if (!(is >> family)) continue;
    std::string a;
    if (!(is >> a)) throw config_error("conjugacy node '" + part + "' lacks a parameter");
    if (family == "sine") {
      int n = 1;
      if (!(is >> n)) n = 1;
      nodes.push_back(Node<Real>::sine(from_decimal<Real>(a), n));
    } else if (family == "quadratic") {
      nodes.push_back(Node<Real>::quadratic(from_decimal<Real>(a)));
    } else {
      throw config_error("unknown conjugacy family '" + family + "'");
    }
  }
  return Chain<Real>(nodes);
}

namespace {

Giet<Real> read_giet_file(const std::string& path, int bits) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read GIET file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error("malformed GIET file " + path + ": " + e.what());
  }
  return io::giet_from_json(j, bits);
}

Vector<Real> lengths_for(const GietSpec& spec, int d, std::mt19937_64& rng, int bits) {
  Vector<Real> lambda(d);
  if (spec.lambda == "golden") {
    if (d != 2) throw config_error("golden lengths need d = 2");
    Real g = (sqrt(Real(5)) - 1) / 2;
    lambda << g, 1 - g;
  } else if (spec.lambda == "random") {
    Real total = 0;
    for (int i = 0; i < d; ++i) {
      lambda[i] = random_unit(rng, bits) + Real("1e-3");
      total += lambda[i];
    }
    lambda /= total;
  } else {
    std::istringstream is(spec.lambda);
    std::string tok;
    int i = 0;
    while (is >> tok) {
      if (i >= d) throw config_error("too many lengths");
      lambda[i++] = from_decimal<Real>(tok);
    }
    if (i != d) throw config_error("lambda needs d entries");
  }
  return lambda;
}

}  // namespace

ScenarioInput build_input(const GietSpec& spec, int bits, std::uint64_t seed) {
  if (!spec.file.empty()) {
    ScenarioInput in{read_giet_file(spec.file, bits), std::nullopt};
    if (!spec.model_file.empty()) in.model = read_giet_file(spec.model_file, bits);
    else if (in.map.is_standard()) in.model = in.map;
    return in;
  }
  std::vector<int> top = spec.top, bottom = spec.bottom;
  if (top.empty()) {
    top = {1, 2};
    bottom = {2, 1};
  }
  auto pi = validate_combinatorics_one_based(top, bottom);
  std::mt19937_64 rng(seed);
  auto T0 = make_standard_iet(pi, lengths_for(spec, pi.d(), rng, bits), bits);
  if (spec.conjugacy.empty()) return {T0, T0};
  return {conjugate_by_diffeo(T0, parse_conjugacy(spec.conjugacy)), T0};
}

// ---------------------------------------------------------------- scenarios

namespace {

struct Artifacts {
  json summary;
  std::string series;
};

Artifacts rotation_sanity(const ScenarioConfig& c) {
  std::vector<Giet<Real>> inputs;
  if (c.giet.lambda == "random" && c.giet.file.empty()) {
    std::mt19937_64 rng(c.seed);
    for (int i = 0; i < c.samples; ++i) {
      GietSpec s = c.giet;
      inputs.push_back(build_input(s, c.precision_bits, rng()).map);
    }
  } else {
    inputs.push_back(build_input(c.giet, c.precision_bits, c.seed).map);
  }
  std::ostringstream csv;
  csv << "input,index,zorich_run,partial_quotient\n";
  json per = json::array();
  int matched_inputs = 0;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const auto& T = inputs[n];
    if (T.d() != 2 || !T.is_standard()) throw config_error("rotation-sanity needs standard d = 2 inputs");
    const auto& pi = T.combinatorics();
    auto [p, q] = dyadic_ratio(T.top_interval(pi.top(0)).length(), T.top_interval(pi.top(1)).length());
    auto cf = partial_quotients(p, q, c.depth);
    auto runs = zorich_runs(T, c.depth);
    int matched = 0;
    for (int i = 0; i < c.depth; ++i) {
      bool ok = i < static_cast<int>(cf.size()) && BigInt(runs[i]) == cf[i];
      matched += ok;
      csv << n << ',' << i << ',' << runs[i] << ',' << (i < static_cast<int>(cf.size()) ? cf[i].str() : "") << '\n';
    }
    matched_inputs += matched == c.depth;
    per.push_back({{"matched", matched}, {"total", c.depth}});
  }
  json s;
  s["inputs"] = inputs.size();
  s["quotients"] = c.depth;
  s["matched_inputs"] = matched_inputs;
  s["all_match"] = matched_inputs == static_cast<int>(inputs.size());
  s["per_input"] = per;
  return {s, csv.str()};
}

struct Machinery {
  InductionChain<Real> chain;
  TowerHierarchy<Real> hierarchy;
  SpecialSums<Real> sums;

  Machinery(const Giet<Real>& T, const ScenarioConfig& c)
      : chain(make_chain(T, c)), hierarchy(chain), sums(hierarchy, Observable<Real>::log_derivative(T)) {}

  static InductionChain<Real> make_chain(const Giet<Real>& T, const ScenarioConfig& c) {
    InductionChain<Real> chain(T, acceleration_kind(c.acceleration));
    chain.extend_to(c.depth);
    return chain;
  }

  int top_level(const ScenarioConfig& c) const { return std::min(c.depth, hierarchy.depth()); }
};

Artifacts sbs_decay(const ScenarioConfig& c) {
  auto input = build_input(c.giet, c.precision_bits, c.seed);
  Machinery m(input.map, c);
  const int K = m.top_level(c);
  std::ostringstream csv;
  csv << "k,sup_norm_fk,c2_distance\n";
  std::vector<double> sup, c2;
  for (int k = 0; k <= K; ++k) {
    sup.push_back(to_double(m.sums.sup_norm(k)));
    c2.push_back(to_double(c2_distance_to_iets(renormalized_map(m.chain, k))));
    csv << k << ',' << io::decimal(sup.back()) << ',' << io::decimal(c2.back()) << '\n';
  }
  json s;
  s["levels"] = K;
  s["sup_norm"] = sup;
  s["c2_distance"] = c2;
  const bool zero = std::all_of(sup.begin(), sup.end(), [](double v) { return v == 0; });
  bool c2_decreasing = true;
  for (int k = c.first_level + 1; k <= K; ++k) c2_decreasing = c2_decreasing && c2[k] < c2[k - 1];
  s["flags"] = {{"identically_zero", zero}, {"c2_decreasing", c2_decreasing}};
  if (zero) {
    s["fit"] = nullptr;
    s["fit_skipped"] = "identically zero";
  } else {
    std::vector<double> ks, logs;
    for (int k = c.first_level; k <= K; ++k) {
      if (sup[k] <= 0) continue;
      ks.push_back(k);
      logs.push_back(std::log(sup[k]));
    }
    auto fit = ols_fit(ks, logs);
    s["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2},
                {"ratio", std::exp(fit.slope)}, {"first_level", c.first_level}, {"last_level", K}};
  }
  return {s, csv.str()};
}

Artifacts broken_decay(const ScenarioConfig& c) {
  auto input = build_input(c.giet, c.precision_bits, c.seed);
  Machinery m(input.map, c);
  const int K = m.top_level(c);
  const int d = input.map.d();
  std::vector<io::DecayRow> rows;
  std::vector<double> smoothed;
  for (int k = c.first_level; k <= K; ++k) {
    io::DecayRow row{k, m.sums.sup_norm(k), {}, Real(0)};
    Real worst = 0;
    for (int j = 0; j < d; ++j) {
      auto est = broken_sup_estimate(m.sums, k, j);
      row.broken.push_back(est.gap);
      if (est.gap > worst) worst = est.gap;
    }
    for (int n = k; n < std::min(m.chain.depth(), m.hierarchy.depth() + 1); ++n)
      row.bound += 2 * Real(matrix_norm(m.chain.matrix(n))) * m.sums.sup_norm(n);
    smoothed.push_back(to_double(worst));
    rows.push_back(std::move(row));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < smoothed.size(); ++i) decreasing = decreasing && smoothed[i] < smoothed[i - 1];
  json s;
  s["first_level"] = c.first_level;
  s["last_level"] = K;
  s["max_gap"] = smoothed;
  s["flags"] = {{"strictly_decreasing", decreasing}};
  std::vector<double> ks, logs;
  for (std::size_t i = 0; i < smoothed.size(); ++i)
    if (smoothed[i] > 0) {
      ks.push_back(c.first_level + static_cast<double>(i));
      logs.push_back(std::log(smoothed[i]));
    }
  if (ks.size() >= 3) {
    auto fit = ols_fit(ks, logs);
    s["fit"] = {{"slope", fit.slope}, {"r2", fit.r2}, {"ratio", std::exp(fit.slope)}};
  } else {
    s["fit"] = nullptr;
  }
  return {s, io::decay_csv(rows, d)};
}

Artifacts holder(const ScenarioConfig& c) {
  auto input = build_input(c.giet, c.precision_bits, c.seed);
  if (!input.model) throw config_error("holder needs a model map");
  Machinery m(input.map, c);
  auto model = Machinery::make_chain(*input.model, c);
  HolderOptions opt;
  opt.refinement = c.refinement;
  opt.workers = c.workers;
  opt.min_pairs_per_level = c.min_pairs_per_level;
  auto report = holder_fit(m.sums, model, sample_pairs(c.samples, c.seed), opt);
  return {io::regularity_json(report), io::regularity_csv(report)};
}

Artifacts tpg(const ScenarioConfig& c) {
  auto input = build_input(c.giet, c.precision_bits, c.seed);
  const Giet<Real>& T0 = input.model ? *input.model : input.map;
  auto report = tpg_probe(T0, c.depth);
  return {io::tpg_json(report), io::tpg_csv(report)};
}

std::string write_file(const std::filesystem::path& dir, const std::string& name, const std::string& bytes,
                       json& listing) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw config_error("cannot write " + (dir / name).string());
  out << bytes;
  listing.push_back({{"path", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  return name;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& c) {
  ScenarioOutcome outcome;
  std::error_code ec;
  std::filesystem::create_directories(c.output, ec);
  if (ec) throw config_error("cannot create " + c.output.string());
  // Artifacts of an earlier run in the same directory would be orphans.
  for (const char* name : {"summary.json", "series.csv", "error.json", "manifest.json"})
    std::filesystem::remove(c.output / name, ec);
  PrecisionScope scope(c.precision_bits);
  const std::string canonical = canonical_config(c);
  json files = json::array();
  json error;
  try {
    Artifacts a;
    if (c.scenario == "rotation-sanity") a = rotation_sanity(c);
    else if (c.scenario == "sbs-decay") a = sbs_decay(c);
    else if (c.scenario == "broken-decay") a = broken_decay(c);
    else if (c.scenario == "holder") a = holder(c);
    else if (c.scenario == "tpg") a = tpg(c);
    else throw config_error("unknown scenario '" + c.scenario + "'");
    a.summary["scenario"] = c.scenario;
    outcome.summary = a.summary;
    outcome.files.push_back(write_file(c.output, "summary.json", io::dump(a.summary), files));
    outcome.files.push_back(write_file(c.output, "series.csv", a.series, files));
  } catch (const Error& e) {
    outcome.status = exit_status(e.code());
    error = io::error_json(e);
    outcome.summary = error;
    outcome.files.push_back(write_file(c.output, "error.json", io::dump(error), files));
  }
  json manifest;
  manifest["format"] = "gietlab.manifest/1";
  manifest["scenario"] = c.scenario;
  manifest["status"] = outcome.status;
  manifest["config_sha256"] = sha256_hex(canonical);
  manifest["config"] = split(canonical, '\n');
  manifest["versions"] = version_info();
  manifest["files"] = files;
  std::ofstream(c.output / "manifest.json", std::ios::binary) << io::dump(manifest);
  outcome.files.push_back("manifest.json");
  return outcome;
}

}  // namespace gietlab
