#pragma once

// Report serialization. Reports are ordered JSON objects with schema
// "gradeval/1"; everything except "timings" is a pure function of
// (config, seed).

#include <string>
#include <vector>

#include "gradeval/cli/config.hpp"
#include "gradeval/costmodel.hpp"
#include "gradeval/gradient.hpp"
#include "gradeval/pipelines.hpp"

namespace gradeval::cli {

inline constexpr const char* kSchema = "gradeval/1";

Json plan_to_json(const GradientPlan& plan);
Json ledger_to_json(const ResourceLedger& ledger);
Json cost_to_json(const CostRecord& record);
/// Estimate block: ids, estimates, references, errors, repetitions.
Json estimation_to_json(const EstimationReport& report);

/// Skeleton with every required field present (null or empty where unused).
Json make_report(Task task, std::uint64_t seed, OracleMode mode);

/// Problems found against the published schema; empty means valid.
std::vector<std::string> validate_report(const Json& report);

/// Deterministic text form (2-space indent, trailing newline).
std::string dump_report(const Json& report);
/// The report with "timings" removed, for byte-wise comparisons.
std::string dump_without_timings(Json report);

}  // namespace gradeval::cli
