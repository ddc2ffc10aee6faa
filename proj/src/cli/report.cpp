#include "gradeval/cli/report.hpp"

#include <set>

namespace gradeval::cli {

Json plan_to_json(const GradientPlan& plan) {
  Json j;
  j["kind"] = plan.kind == PlanKind::uniform ? "uniform" : "general";
  j["M"] = plan.M;
  j["epsilon"] = plan.epsilon;
  j["delta"] = plan.delta;
  j["c"] = plan.c;
  j["z"] = plan.z;
  j["z_norm"] = plan.z_norm;
  j["m"] = plan.m;
  j["r"] = plan.r;
  j["S"] = plan.S;
  j["x_max"] = plan.x_max;
  j["n"] = plan.n;
  j["solved_n"] = plan.solved_n;
  j["clamped"] = plan.clamped;
  j["T"] = plan.T;
  j["coefficients"] = plan.coefficients;
  j["a_const"] = plan.a_const;
  j["b_const"] = plan.b_const;
  j["unit_phase_queries"] = plan.unit_phase_queries;
  j["conversion_multiplier"] = plan.conversion_multiplier;
  j["log_base"] = plan.log_base;
  j["index_qubits"] = plan.index_qubits();
  j["range_condition"] = range_condition_holds(plan);
  return j;
}

Json ledger_to_json(const ResourceLedger& ledger) {
  Json j;
  j["u_psi_queries"] = ledger.u_psi_queries();
  j["u_psi_forward"] = ledger.u_psi_forward;
  j["u_psi_inverse"] = ledger.u_psi_inverse;
  j["unit_phase_queries"] = ledger.unit_phase_queries;
  j["phase_oracle_queries"] = ledger.phase_oracle_queries;
  j["controlled_evolution_count"] = ledger.controlled_evolution_count;
  j["offset_evolution_count"] = ledger.offset_evolution_count;
  j["total_evolution_duration"] = ledger.total_evolution_duration;
  j["qubit_high_water"] = ledger.qubit_high_water;
  return j;
}

Json cost_to_json(const CostRecord& record) {
  Json j;
  j["scenario"] = to_string(record.scenario);
  if (record.optimal_K) j["optimal_K"] = *record.optimal_K;
  Json rows = Json::array();
  for (const auto& row : record.rows) {
    Json r;
    r["method"] = row.method;
    r["quantity"] = row.quantity;
    r["expression"] = row.to_string();
    Json terms = Json::array();
    for (const auto& t : row.terms) {
      Json factors = Json::array();
      for (const auto& f : t.factors) {
        const char* kind = f.kind == CostFactor::Kind::power ? "power" : (f.kind == CostFactor::Kind::log ? "log" : "loglog");
        factors.push_back(Json{{"symbol", f.symbol}, {"base", f.base}, {"kind", kind}, {"exponent", f.exponent}});
      }
      terms.push_back(Json{{"coefficient", t.coefficient}, {"factors", factors}, {"value", t.value()}});
    }
    r["terms"] = terms;
    r["value"] = row.value();
    r["tilde"] = row.tilde;
    r["constants_known"] = row.constants_known;
    if (!row.note.empty()) r["note"] = row.note;
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j;
}

Json estimation_to_json(const EstimationReport& report) {
  Json j;
  j["pipeline"] = report.pipeline;
  j["ids"] = report.ids;
  j["estimates"] = report.estimates;
  j["references"] = report.references;
  j["errors"] = report.errors;
  j["max_error"] = report.max_error;
  j["success"] = report.success;
  j["trial"] = report.trial;
  j["convention"] = report.convention;
  j["repetitions"] = report.repetitions;
  j["labels"] = report.labels;
  return j;
}

Json make_report(Task task, std::uint64_t seed, OracleMode mode) {
  Json j;
  j["schema"] = kSchema;
  j["task"] = to_string(task);
  j["plan"] = nullptr;
  j["ledger"] = nullptr;
  j["estimates"] = Json::array();
  j["references"] = Json::array();
  j["errors"] = Json::array();
  j["success"] = false;
  j["seed"] = seed;
  j["mode"] = to_string(mode);
  j["timings"] = Json::object();
  return j;
}

std::vector<std::string> validate_report(const Json& r) {
  std::vector<std::string> problems;
  if (!r.is_object()) return {"report is not an object"};
  const auto has = [&](const char* key) {
    if (!r.contains(key)) {
      problems.push_back(std::string("missing field '") + key + "'");
      return false;
    }
    return true;
  };
  if (has("schema") && r["schema"] != kSchema) problems.push_back("schema must be gradeval/1");
  static const std::set<std::string> tasks{"estimate", "correlate", "fixture", "cost", "benchmark"};
  if (has("task") && (!r["task"].is_string() || !tasks.count(r["task"].get<std::string>()))) {
    problems.push_back("task must be one of estimate, correlate, fixture, cost, benchmark");
  }
  if (has("plan") && !r["plan"].is_null()) {
    if (!r["plan"].is_object()) {
      problems.push_back("plan must be an object or null");
    } else {
      for (const char* key : {"kind", "M", "epsilon", "delta", "m", "r", "S", "x_max", "n", "T", "coefficients"}) {
        if (!r["plan"].contains(key)) problems.push_back(std::string("plan is missing '") + key + "'");
      }
    }
  }
  if (has("ledger") && !r["ledger"].is_null()) {
    if (!r["ledger"].is_object()) {
      problems.push_back("ledger must be an object or null");
    } else {
      for (const char* key : {"u_psi_queries", "controlled_evolution_count", "total_evolution_duration",
                              "qubit_high_water", "phase_oracle_queries"}) {
        if (!r["ledger"].contains(key)) problems.push_back(std::string("ledger is missing '") + key + "'");
      }
    }
  }
  std::size_t lengths[3] = {0, 0, 0};
  int i = 0;
  for (const char* key : {"estimates", "references", "errors"}) {
    if (has(key)) {
      const auto& arr = r[key];
      if (!arr.is_array()) {
        problems.push_back(std::string(key) + " must be an array");
      } else {
        for (const auto& v : arr) {
          if (!v.is_number()) {
            problems.push_back(std::string(key) + " must hold numbers");
            break;
          }
        }
        lengths[i] = arr.size();
      }
    }
    ++i;
  }
  if (lengths[0] != lengths[1] || lengths[0] != lengths[2]) {
    problems.push_back("estimates, references and errors must have equal length");
  }
  if (has("success") && !r["success"].is_boolean()) problems.push_back("success must be a boolean");
  if (has("seed") && !r["seed"].is_number_unsigned() && !(r["seed"].is_number_integer() && r["seed"] >= 0)) {
    problems.push_back("seed must be a non-negative integer");
  }
  if (has("mode") && r["mode"] != "analytic" && r["mode"] != "circuit") {
    problems.push_back("mode must be analytic or circuit");
  }
  if (has("timings") && !r["timings"].is_object()) problems.push_back("timings must be an object");
  return problems;
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

std::string dump_without_timings(Json report) {
  report.erase("timings");
  return dump_report(report);
}

}  // namespace gradeval::cli
