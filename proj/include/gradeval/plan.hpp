#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gradeval {

enum class PlanKind { uniform, general };

/// Solved parameters of one gradient-estimation run. Logs are base 2.
struct GradientPlan {
  PlanKind kind = PlanKind::uniform;
  std::size_t M = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double c = 0.0;              // uniform derivative constant; 0 for general plans
  std::vector<double> z;       // per-component derivative bounds
  double z_norm = 0.0;         // ||z||_2
  int m = 0;                   // central-difference order parameter
  double r = 0.0;              // grid scale
  double S = 0.0;              // fractional power scale, 4/(epsilon r)
  double x_max = 0.0;          // r m
  std::vector<int> n;          // index register widths
  std::vector<int> solved_n;   // widths before any qubit-budget clamp
  bool clamped = false;
  int T = 0;                   // repetitions for the median
  std::vector<double> coefficients;  // a_l for l = -m..m, stored at l + m
  double a_const = 0.0;
  double b_const = 0.0;
  std::uint64_t unit_phase_queries = 0;  // ceil(S * sum |a_l|) per repetition
  int conversion_multiplier = 1;         // probability-oracle calls per unit phase query
  int log_base = 2;

  double coefficient(int l) const { return coefficients.at(static_cast<std::size_t>(l + m)); }
  double coefficient_l1() const;
  std::uint64_t grid_points(std::size_t i) const { return std::uint64_t{1} << n.at(i); }
  int index_qubits() const;
  /// N + 1 + sum n_i.
  int logical_qubits(int system_qubits) const { return system_qubits + 1 + index_qubits(); }
};

}  // namespace gradeval
