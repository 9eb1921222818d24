#pragma once

#include "gietlab/io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace gietlab {

// Input map description. Either `file` (GIET JSON) or the inline fields.
struct GietSpec {
  std::string file;
  std::string model_file;  // unperturbed map for regularity runs
  std::vector<int> top, bottom;  // 1-based labels
  // "golden" (d = 2 only), "random", or d decimal lengths.
  std::string lambda = "golden";
  // Conjugating diffeo as ';'-separated nodes: "sine A N", "quadratic A".
  std::string conjugacy;
};

struct ScenarioConfig {
  std::string scenario;
  GietSpec giet;
  int precision_bits = kDefaultPrecisionBits;
  std::uint64_t seed = 1;
  std::string acceleration = "positive";  // rv, zorich or positive
  int depth = 10;                          // acceleration steps
  int first_level = 2;                     // first level entering decay fits
  long long floor_cap = kDefaultFloorCap;
  long long orbit_cap = 1'000'000;
  int samples = 400;
  int refinement = 3;
  int min_pairs_per_level = 8;
  int workers = 1;
  std::filesystem::path output = "out";
};

// INI text: [scenario] name, seed, precision_bits, workers, output;
// [giet] file, model, top, bottom, lambda, conjugacy, acceleration;
// [budgets] depth, first_level, floor_cap, orbit_cap;
// [samples] count, refinement, min_pairs_per_level.
// Unknown keys and non-positive budgets raise ConfigError.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);

// Sorted key = value lines of every setting except the output directory.
std::string canonical_config(const ScenarioConfig& config);
std::string sha256_hex(const std::string& bytes);

struct ScenarioInput {
  Giet<Real> map;
  std::optional<Giet<Real>> model;
};

Chain<Real> parse_conjugacy(const std::string& text);
// Must run with the working precision set to `precision_bits`.
ScenarioInput build_input(const GietSpec& spec, int precision_bits, std::uint64_t seed);

// Uniform in [0, 1) with `bits` random bits.
Real random_unit(std::mt19937_64& rng, int bits);
double random_double(std::mt19937_64& rng);

// x uniform in (0.01, 0.99), gap 10^(-0.5 - decades U), y = x +- gap in range.
std::vector<SamplePair<Real>> sample_pairs(int count, std::uint64_t seed, double decades = 5);

struct ScenarioOutcome {
  int status = 0;
  nlohmann::json summary;
  std::vector<std::string> files;  // relative to the output directory
};

// Runs one of rotation-sanity, sbs-decay, broken-decay, holder, tpg and
// writes summary.json, series.csv and manifest.json into config.output.
// Errors are written to error.json and reflected in the status.
ScenarioOutcome run_scenario(const ScenarioConfig& config);

nlohmann::json version_info();

}  // namespace gietlab
