#include "gradeval/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gradeval {

namespace {

// Lemma-24 failure fraction 1/b and the matching a with 1/a^2 + 1/b = 1/2304.
constexpr double kBConst = 3840.0;
const double kAConst = std::sqrt(1.0 / (1.0 / 2304.0 - 1.0 / kBConst));

void check_common(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

int ceil_log2(double v) { return static_cast<int>(std::ceil(std::log2(v) - 1e-12)); }

void finish_plan(GradientPlan& plan) {
  plan.S = 4.0 / (plan.epsilon * plan.r);
  plan.x_max = plan.r * plan.m;
  plan.T = repetitions_for(plan.M, plan.delta);
  const auto exact = difference_coefficients<long double>(plan.m);
  plan.coefficients.assign(exact.begin(), exact.end());
  plan.a_const = kAConst;
  plan.b_const = kBConst;
  plan.unit_phase_queries = static_cast<std::uint64_t>(std::ceil(plan.S * plan.coefficient_l1() - 1e-9));
  const double planned = static_cast<double>(plan.T) * static_cast<double>(plan.unit_phase_queries);
  plan.conversion_multiplier = std::max(1, ceil_log2(planned / plan.epsilon));
  plan.solved_n = plan.n;
  plan.log_base = 2;
}

}  // namespace

double GradientPlan::coefficient_l1() const {
  double sum = 0.0;
  for (double a : coefficients) sum += std::abs(a);
  return sum;
}

int GradientPlan::index_qubits() const { return std::accumulate(n.begin(), n.end(), 0); }

int repetitions_for(std::size_t M, double delta) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return static_cast<int>(std::ceil(18.0 * std::log(2.0 * static_cast<double>(M) / delta)));
}

GradientPlan solve_plan_uniform(std::size_t M, double epsilon, double delta, double c) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  check_common(epsilon, delta);
  if (!(c > 0.0)) throw std::invalid_argument("derivative constant c must be positive");
  if (epsilon > c) throw std::invalid_argument("epsilon must not exceed c");
  GradientPlan plan;
  plan.kind = PlanKind::uniform;
  plan.M = M;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.c = c;
  plan.z.assign(M, c);
  const double sqrt_m = std::sqrt(static_cast<double>(M));
  plan.z_norm = c * sqrt_m;
  plan.m = std::max(1, ceil_log2(c * sqrt_m / epsilon));
  const double cms = c * plan.m * sqrt_m;
  const double r_inv = 9.0 * cms * std::pow(81.0 * 8.0 * 42.0 * kPi * cms / epsilon, 1.0 / (2.0 * plan.m));
  plan.r = 1.0 / r_inv;
  plan.n.assign(M, std::max(1, ceil_log2(12.0 * c / epsilon)));
  finish_plan(plan);
  return plan;
}

GradientPlan solve_plan_general(std::span<const double> bounds, double epsilon, double delta) {
  if (bounds.empty()) throw std::invalid_argument("M must be >= 1");
  check_common(epsilon, delta);
  GradientPlan plan;
  plan.kind = PlanKind::general;
  plan.M = bounds.size();
  plan.epsilon = epsilon;
  plan.delta = delta;
  for (double b : bounds) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("norm bounds must be positive");
    plan.z.push_back(2.0 * b);
  }
  plan.z_norm = std::sqrt(std::inner_product(plan.z.begin(), plan.z.end(), plan.z.begin(), 0.0));
  if (epsilon >= plan.z_norm) throw std::invalid_argument("epsilon must be below ||z||");
  plan.m = std::max(1, ceil_log2(plan.z_norm / epsilon));
  const double zs = plan.z_norm * std::sqrt(plan.m / 2.0);
  const double r_inv = 9.0 * zs * std::pow(64.0 * 8.0 * kAConst * kPi * zs / epsilon, 1.0 / (2.0 * plan.m));
  plan.r = 1.0 / r_inv;
  for (double z : plan.z) plan.n.push_back(std::max(1, ceil_log2(12.0 * z / epsilon)));
  finish_plan(plan);
  return plan;
}

bool range_condition_holds(const GradientPlan& plan) {
  for (std::size_t i = 0; i < plan.n.size(); ++i) {
    if (!(static_cast<double>(plan.grid_points(i)) > 2.0 * plan.S * plan.r * std::abs(plan.z[i]))) return false;
  }
  return true;
}

void apply_qubit_budget(GradientPlan& plan, int system_qubits, int max_qubits) {
  while (plan.logical_qubits(system_qubits) > max_qubits) {
    auto widest = std::max_element(plan.n.begin(), plan.n.end());
    if (*widest <= 1) {
      throw std::invalid_argument("qubit budget " + std::to_string(max_qubits) + " cannot hold the plan (needs " +
                                  std::to_string(plan.logical_qubits(system_qubits)) + " with 1-qubit registers)");
    }
    --*widest;
    plan.clamped = true;
  }
}

double decode(const GradientPlan& plan, double k_value, std::size_t component) {
  return static_cast<double>(plan.grid_points(component)) * k_value * plan.epsilon / 4.0;
}

std::vector<double> median_aggregate(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("median of an empty table");
  const std::size_t M = rows.front().size();
  std::vector<double> out(M);
  std::vector<double> column(rows.size());
  for (std::size_t j = 0; j < M; ++j) {
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (rows[t].size() != M) throw std::invalid_argument("ragged estimate table");
      column[t] = rows[t][j];
    }
    const auto mid = column.begin() + static_cast<std::ptrdiff_t>((column.size() - 1) / 2);
    std::nth_element(column.begin(), mid, column.end());
    out[j] = *mid;
  }
  return out;
}

// ---------------------------------------------------------------------------

Algorithm1Runner::Algorithm1Runner(const GradientPlan& plan, std::shared_ptr<const PhaseOracle> oracle)
    : plan_(plan), oracle_(std::move(oracle)) {
  if (!oracle_) throw std::invalid_argument("null phase oracle");
  if (oracle_->widths() != plan_.n) throw std::invalid_argument("phase oracle grid differs from the plan");
  for (std::size_t j = 0; j < plan_.n.size(); ++j) layout_.add("x" + std::to_string(j + 1), plan_.n[j]);
}

StateVector Algorithm1Runner::prepare(ResourceLedger& ledger, RngStream* perturbation) const {
  StateVector state(layout_);
  for (int q = 0; q < layout_.total_width(); ++q) apply_gate(state, gates::hadamard(), std::vector<int>{q});
  apply_phase_oracle(state, *oracle_, power(), ledger, perturbation);
  for (const auto& reg : layout_.registers()) apply_qft_inverse(state, reg.name);
  return state;
}

Algorithm1Outcome Algorithm1Runner::run(RngStream& rng, ResourceLedger& ledger) {
  std::uint64_t index = 0;
  if (oracle_->phase_error() == 0.0) {
    if (!cached_) {
      ResourceLedger scratch(plan_.M);
      cached_.emplace(prepare(scratch));
    }
    oracle_->charge(power(), ledger);
    ledger.note_qubits(layout_.total_width());
    index = cached_->sample_index(rng);
  } else {
    RngStream perturbation = rng.substream(1);
    const StateVector state = prepare(ledger, &perturbation);
    index = Sampler(state).sample_index(rng);
  }
  const auto decoded = decode_outcome(layout_, index);
  Algorithm1Outcome out;
  for (std::size_t j = 0; j < decoded.registers.size(); ++j) {
    out.labels.push_back(decoded.registers[j].label);
    out.values.push_back(decoded.registers[j].value);
    out.estimates.push_back(decode(plan_, decoded.registers[j].value, j));
  }
  return out;
}

Algorithm1Outcome run_algorithm1(const GradientPlan& plan, std::shared_ptr<const PhaseOracle> oracle,
                                 RngStream& rng, ResourceLedger& ledger) {
  Algorithm1Runner runner(plan, std::move(oracle));
  return runner.run(rng, ledger);
}

GradientEstimate estimate_gradient(Algorithm1Runner& runner, const RngStream& rng, ResourceLedger& ledger) {
  GradientEstimate est;
  const int T = std::max(1, runner.plan().T);
  for (int t = 0; t < T; ++t) {
    RngStream stream = rng.substream(static_cast<std::uint64_t>(t));
    auto outcome = runner.run(stream, ledger);
    est.repetitions.push_back(std::move(outcome.estimates));
    est.labels.push_back(std::move(outcome.labels));
  }
  est.median = median_aggregate(est.repetitions);
  return est;
}

}  // namespace gradeval
