#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "mmw/experiment.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw mmw::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw mmw::ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Min-max widths: sweepouts, detection and width estimates"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> jobs;
  auto* run = app.add_subcommand("run", "Run the scenario named in a config file");
  run->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed-override", seed_override, "Replace the config's sampling seed");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out-dir", out_dir, "Directory for report.json, table.csv and plot.csv");

  auto* verify = app.add_subcommand("verify", "Re-check a report from its recorded witnesses");
  verify->add_option("report", report_path, "report.json")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto j = read_json(config_path);
      if (seed_override) j["seed"] = *seed_override;
      if (jobs) j["jobs"] = *jobs;
      if (!out_dir.empty()) j["out_dir"] = out_dir;
      const auto config = mmw::ExperimentConfig::parse(j);
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = mmw::run_experiment(config);
      mmw::write_artifacts(result, config.out_dir);
      for (const auto& a : result.assertions)
        std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
      std::cout << config.name << ": " << (result.passed() ? "passed" : "failed") << " in "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s, artifacts in "
                << config.out_dir << "\n";
      return result.passed() ? 0 : 1;
    }
    const auto v = mmw::verify_report(read_json(report_path));
    for (const auto& p : v.problems) std::cout << "MISMATCH " << p << "\n";
    std::cout << (v.ok ? "verified" : "verification failed") << "\n";
    return v.ok ? 0 : 1;
  } catch (const mmw::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mmw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
