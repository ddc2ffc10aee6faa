#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gradeval/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace gradeval::cli;
  CLI::App app{"Gradient-based estimation of many expectation values (state-vector simulation)"};
  std::string config_path;
  std::string out_path;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> max_qubits;
  app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--mode", mode, "Oracle mode")->check(CLI::IsMember({"analytic", "circuit"}));
  app.add_option("--trials", trials, "Independent trials")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "Report path (stdout when omitted)");
  app.add_option("--max-qubits", max_qubits, "Qubit budget; plans above it are clamped")->check(CLI::Range(2, 30));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every usage error maps to the error code.
    return app.exit(e) == 0 ? kExitSuccess : kExitError;
  }

  try {
    RunConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (!mode.empty()) config.options.mode = mode == "circuit" ? gradeval::OracleMode::circuit : gradeval::OracleMode::analytic;
    if (trials) config.trials = *trials;
    if (max_qubits) {
      config.options.max_qubits = *max_qubits;
      config.options.allow_clamp = true;
    }
    const auto result = run_task(config);
    const auto text = dump_report(result.report);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write report to '" + out_path + "'");
      out << text;
    }
    if (result.exit_code == kExitStatistical) std::cerr << "estimation did not meet its accuracy target\n";
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
