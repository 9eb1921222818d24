#include "gietlab/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace gietlab;
using nlohmann::json;

namespace {

struct Globals {
  int precision_bits = 0;  // 0: from the input
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  int workers = 1;
  bool seed_set = false;
};

struct InputFlags {
  std::string giet, model, config;
};

void add_input_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("--giet", f.giet, "GIET JSON document");
  cmd->add_option("--model", f.model, "unperturbed GIET JSON document");
  cmd->add_option("--config", f.config, "scenario config whose [giet] section describes the input");
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.out, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + g.out);
  out << text;
}

int bits_for(const Globals& g, const InputFlags& f) {
  if (g.precision_bits > 0) return g.precision_bits;
  if (!f.config.empty()) return load_config(f.config).precision_bits;
  if (!f.giet.empty()) {
    std::ifstream in(f.giet);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + f.giet);
    try {
      return io::document_precision(json::parse(in), kDefaultPrecisionBits);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("malformed GIET file: ") + e.what());
    }
  }
  return kDefaultPrecisionBits;
}

ScenarioInput load_input(const Globals& g, const InputFlags& f, int bits) {
  GietSpec spec;
  std::uint64_t seed = g.seed;
  if (!f.config.empty()) {
    auto c = load_config(f.config);
    spec = c.giet;
    if (!g.seed_set) seed = c.seed;
  } else if (!f.giet.empty()) {
    spec.file = f.giet;
    spec.model_file = f.model;
  } else {
    throw Error(ErrorCode::ConfigError, "give --giet or --config");
  }
  return build_input(spec, bits, seed);
}

Acceleration parse_kind(const std::string& s) {
  if (s == "rv") return Acceleration::RauzyVeech;
  if (s == "zorich") return Acceleration::Zorich;
  if (s == "positive") return Acceleration::Positive;
  throw Error(ErrorCode::ConfigError, "unknown acceleration '" + s + "'");
}

std::string csv_or_json(const Globals& g, const json& j, const std::string& csv) {
  return g.format == "csv" ? csv : io::dump(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for generalized interval exchange transformations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--precision-bits", g.precision_bits, "working precision in bits")->check(CLI::Range(64, 1 << 16));
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { g.seed = s; g.seed_set = true; }, "random seed");
  app.add_option("--out", g.out, "output file (or directory for run)");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--workers", g.workers, "thread budget")->check(CLI::PositiveNumber);

  InputFlags in;
  std::string acceleration = "positive";
  int steps = 10, level = 3, depth = 10, pairs = 400, refinement = 3;
  long long floor_cap = kDefaultFloorCap, n = 1000;
  std::string x_text = "0.5";
  bool decay = false;

  auto* validate = app.add_subcommand("validate", "check an input and print its invariants");
  add_input_flags(validate, in);

  auto* induce = app.add_subcommand("induce", "run the induction and print the log");
  add_input_flags(induce, in);
  induce->add_option("--steps", steps, "acceleration steps")->check(CLI::PositiveNumber);
  induce->add_option("--acceleration", acceleration, "rv, zorich or positive");

  auto* towers = app.add_subcommand("towers", "dump the level-k dynamical partition");
  add_input_flags(towers, in);
  towers->add_option("--level", level, "partition level")->check(CLI::NonNegativeNumber);
  towers->add_option("--floor-cap", floor_cap, "maximum number of floors")->check(CLI::PositiveNumber);
  towers->add_option("--acceleration", acceleration, "rv, zorich or positive");

  auto* birkhoff = app.add_subcommand("birkhoff", "Birkhoff sums of log DT");
  add_input_flags(birkhoff, in);
  birkhoff->add_option("--x", x_text, "base point (decimal)");
  birkhoff->add_option("-n,--n", n, "orbit length");
  birkhoff->add_option("--depth", depth, "acceleration steps")->check(CLI::PositiveNumber);
  birkhoff->add_flag("--decay", decay, "print the decay profile instead");

  auto* regularity = app.add_subcommand("regularity", "Hoelder fit of the conjugacy");
  add_input_flags(regularity, in);
  regularity->add_option("--depth", depth, "acceleration steps")->check(CLI::PositiveNumber);
  regularity->add_option("--pairs", pairs, "sample pairs")->check(CLI::PositiveNumber);
  regularity->add_option("--refinement", refinement, "levels past the pair scale")->check(CLI::PositiveNumber);

  auto* tpg = app.add_subcommand("tpg", "growth probe of the accelerated cocycle");
  add_input_flags(tpg, in);
  tpg->add_option("--steps", steps, "acceleration steps")->check(CLI::Range(3, 100000));

  std::string config_path;
  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "scenario config (INI)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << io::dump(io::error_json(Error(ErrorCode::ConfigError, e.what())));
    return exit_status(ErrorCode::ConfigError);
  }

  try {
    if (run->parsed()) {
      auto c = load_config(config_path);
      if (g.seed_set) c.seed = g.seed;
      if (g.precision_bits > 0) c.precision_bits = g.precision_bits;
      if (!g.out.empty()) c.output = g.out;
      if (g.workers > 1) c.workers = g.workers;
      auto outcome = run_scenario(c);
      std::cout << io::dump(outcome.summary);
      return outcome.status;
    }

    const int bits = bits_for(g, in);
    PrecisionScope scope(bits);
    auto input = load_input(g, in, bits);
    const auto& T = input.map;

    if (validate->parsed()) {
      auto sing = singularity_structure(T.combinatorics());
      json j;
      j["valid"] = true;
      j["d"] = T.d();
      j["genus"] = sing.genus;
      j["singularity_classes"] = sing.kappa;
      j["standard"] = T.is_standard();
      j["affine"] = T.is_affine();
      j["total_nonlinearity"] = io::decimal(total_nonlinearity(T));
      json b = json::array();
      for (const auto& v : boundary(T)) b.push_back(io::decimal(v));
      j["boundary"] = b;
      j["c2_distance_to_iets"] = to_double(c2_distance_to_iets(T));
      j["giet"] = io::giet_to_json(T);
      emit(g, io::dump(j));
    } else if (induce->parsed()) {
      InductionChain<Real> chain(T, parse_kind(acceleration));
      chain.extend_to(steps);
      if (g.format == "csv") {
        std::ostringstream os;
        os << "k,n_k,norm,lambda_norm\n";
        for (int k = 0; k < chain.depth(); ++k)
          os << k << ',' << chain.rv_time(k + 1) << ',' << matrix_norm(chain.matrix(k)) << ','
             << io::decimal(chain.inducing_length(k + 1)) << '\n';
        emit(g, os.str());
      } else {
        emit(g, io::induction_log(chain));
      }
    } else if (towers->parsed()) {
      InductionChain<Real> chain(T, parse_kind(acceleration));
      chain.extend_to(level);
      auto P = build_partition(chain, level, floor_cap);
      json j;
      j["level"] = level;
      j["floors"] = P.floors.size();
      j["heights"] = P.heights;
      j["mesh"] = io::decimal(mesh(P));
      emit(g, csv_or_json(g, j, io::partition_csv(P)));
    } else if (birkhoff->parsed()) {
      InductionChain<Real> chain(T);
      chain.extend_to(depth);
      TowerHierarchy<Real> H(chain);
      SpecialSums<Real> sums(H, Observable<Real>::log_derivative(T));
      if (decay) {
        std::vector<io::DecayRow> rows;
        for (int k = 0; k <= H.depth(); ++k) {
          io::DecayRow row{k, sums.sup_norm(k), {}, Real(0)};
          for (int j = 0; j < T.d(); ++j) row.broken.push_back(broken_sup_estimate(sums, k, j).gap);
          for (int m = k; m < chain.depth(); ++m)
            row.bound += 2 * Real(matrix_norm(chain.matrix(m))) * sums.sup_norm(m);
          rows.push_back(std::move(row));
        }
        emit(g, io::decay_csv(rows, T.d()));
      } else {
        Real x = from_decimal<Real>(x_text);
        Real direct = birkhoff_sum(T, sums.observable(), x, n);
        json j;
        j["x"] = io::decimal(x);
        j["n"] = n;
        j["direct"] = io::decimal(direct);
        if (n > 0) {
          auto dec = geometric_decomposition(sums, x, n);
          j["decomposition"] = io::decimal(dec.total);
          j["bound"] = io::decimal(dec.bound);
          j["deepest_level"] = dec.deepest_level;
          j["terms"] = dec.terms.size();
        }
        emit(g, io::dump(j));
      }
    } else if (regularity->parsed()) {
      if (!input.model) throw Error(ErrorCode::ConfigError, "regularity needs a model map (--model)");
      InductionChain<Real> chain(T), model(*input.model);
      chain.extend_to(depth);
      model.extend_to(depth);
      TowerHierarchy<Real> H(chain);
      SpecialSums<Real> sums(H, Observable<Real>::log_derivative(T));
      HolderOptions opt;
      opt.refinement = refinement;
      opt.workers = g.workers;
      auto report = holder_fit(sums, model, sample_pairs(pairs, g.seed), opt);
      emit(g, csv_or_json(g, io::regularity_json(report), io::regularity_csv(report)));
    } else if (tpg->parsed()) {
      const auto& T0 = input.model ? *input.model : T;
      auto report = tpg_probe(T0, steps);
      emit(g, csv_or_json(g, io::tpg_json(report), io::tpg_csv(report)));
    }
    return 0;
  } catch (const Error& e) {
    std::cout << io::dump(io::error_json(e));
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::cout << io::dump(json{{"error", "Internal"}, {"message", e.what()}, {"exit_status", 1}});
    return 1;
  }
}
