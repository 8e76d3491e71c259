#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "mmw/chain.hpp"
#include "mmw/errors.hpp"

namespace mmw {

/// Parsed and validated run configuration. See README for the schema.
struct ExperimentConfig {
  std::string name;
  std::string scenario;  // width-scan | s3-targets | detection-suite | flatnorm-oracle | packing-bound
  std::string model = "torus";
  int grid = 81;
  int fields = 1;
  std::uint64_t field_seed = 1;
  std::vector<int> p;
  int samples = 1000;
  int polish = 8;
  std::uint64_t seed = 1;
  int jobs = 1;
  long lines = 100000;
  long check_lines = 400;
  int params = 10000;
  int members = 20;
  int cycles = 200;
  std::vector<double> center{0.37, 0.61};
  std::vector<double> radii{0.05, 0.1, 0.15, 0.2};
  double relative_tol = 0.02;
  double monotone_tol = 0.05;
  std::vector<double> slope_range{0.4, 0.6};
  double weyl_spread = 3.0;
  std::string out_dir = "out";
  nlohmann::json source;  // the config as given

  static ExperimentConfig parse(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunResult {
  nlohmann::json report;
  std::vector<Assertion> assertions;
  std::string table_csv;  // may be empty
  std::string plot_csv;   // may be empty
  bool passed() const;
};

RunResult run_experiment(const ExperimentConfig& config);
/// report.json, table.csv and plot.csv under config.out_dir.
void write_artifacts(const RunResult& result, const std::string& out_dir);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> problems;  // JSON pointer of each failing field, with the reason
};

/// Re-derives the recorded values from the witnesses of a report (members
/// re-evaluated, ball masses re-summed, bounds and fits recomputed). Throws
/// ConfigError on a report that cannot be read at all.
VerifyResult verify_report(const nlohmann::json& report);

/// Flat norm by enumerating every top-cell subset (at most 24 top cells).
double exhaustive_flat_norm(const Mod2Chain& cycle);

}  // namespace mmw
