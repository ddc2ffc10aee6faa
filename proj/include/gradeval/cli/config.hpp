#pragma once

// Run configuration: JSON ingestion with field-path and line diagnostics.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradeval/costmodel.hpp"
#include "gradeval/operators.hpp"
#include "gradeval/oracles.hpp"
#include "gradeval/pipelines.hpp"

namespace gradeval::cli {

using Json = nlohmann::ordered_json;

/// Raised for malformed configs; the message names the offending field
/// (e.g. "observables[1].norm_bound") or the line and column of a syntax error.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Task { estimate, correlate, fixture, cost, benchmark };

std::string to_string(Task task);
std::string to_string(OracleMode mode);

struct CorrelationConfig {
  Hamiltonian hamiltonian;
  std::vector<Matrix> probes;
  std::vector<double> times;
  Matrix source;
  std::vector<CorrelationPart> parts;  // one run per part
};

struct FixtureConfig {
  RealMatrix A;
  RealVector p;
  bool estimate = true;
  int random_instances = 200;
  int max_M = 4;
};

struct BenchmarkConfig {
  std::vector<std::uint64_t> budgets{100, 400, 1600, 6400, 25600};
  int sampling_trials = 200;
};

struct RunConfig {
  Task task = Task::estimate;
  std::string source;  // config path, for messages
  EstimationOptions options;
  std::uint64_t seed = 0;
  int trials = 1;

  std::optional<ObservableSet> observables;
  std::optional<StatePrepOracle> state;
  std::optional<CorrelationConfig> correlation;
  std::optional<FixtureConfig> fixture;
  std::vector<std::pair<CostScenario, CostParams>> costs;
  std::optional<std::string> csv_path;
  BenchmarkConfig benchmark;
};

/// Parses config text; `source` names it in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Task-specific presence checks; run after command-line overrides.
void validate_config(const RunConfig& config);

/// Matrix from JSON rows; entries are numbers or [re, im] pairs.
Matrix parse_matrix(const Json& node, const std::string& field);
/// A state from {kind: basis|product|amplitudes|unitary, data}.
StatePrepOracle parse_state(const Json& node, const std::string& field);

}  // namespace gradeval::cli
