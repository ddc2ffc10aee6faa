#pragma once

// Closed-form cost calculator. Every record carries both a structured
// expression and its numeric value; leading constants that are not known are
// set to 1 and flagged.

#include <optional>
#include <string>
#include <vector>

namespace gradeval {

enum class CostScenario { commuting, noncommuting, krdm, correlation, hybrid_exp, hybrid_poly, tradeoff, general_norm };

std::string to_string(CostScenario s);
CostScenario parse_cost_scenario(const std::string& text);

struct CostFactor {
  enum class Kind { power, log, loglog };
  std::string symbol;  // e.g. "M", "1/eps", "B/eps"
  double base = 1.0;   // numeric value of the symbol
  Kind kind = Kind::power;
  double exponent = 1.0;

  double value() const;
};

struct CostTerm {
  double coefficient = 1.0;
  std::vector<CostFactor> factors;

  double value() const;
};

struct CostExpression {
  std::string method;
  std::string quantity;  // what is counted, e.g. "U_psi queries"
  std::vector<CostTerm> terms;
  bool tilde = false;             // hides polylogarithmic factors
  bool constants_known = false;   // false: leading constant set to 1
  std::string note;

  double value() const;
  std::string to_string() const;
};

struct CostParams {
  std::optional<double> M, N, k, epsilon, delta, B_bar, g, alpha, Gamma, Delta;
  std::vector<double> bounds;  // B_j (B_bar derived when absent)
  std::vector<double> times;   // t_j
};

struct CostRecord {
  CostScenario scenario;
  std::vector<CostExpression> rows;
  std::optional<double> optimal_K;
};

/// Throws std::invalid_argument naming the first missing or invalid parameter.
CostRecord query_cost(CostScenario scenario, const CostParams& params);

struct TradeoffCost {
  double queries;    // sqrt(g M) / eps
  double qubits;     // N + M / g
  double evolution;  // M / eps
};

TradeoffCost tradeoff_groups(double M, double N, double epsilon, double g);

enum class HybridRegime { exponential, polynomial };

struct HybridOptimum {
  double K;
  double cost;  // C(K) at the returned K
  bool gradient_only = false;
};

/// Exponential: C(K) = sqrt(M e^{-alpha K})/eps + K/eps^2.
/// Polynomial:  C(K) = sqrt(M K^{1-alpha})/eps + K/eps^2 for K >= 1.
double hybrid_cost(HybridRegime regime, double M, double epsilon, double alpha, double K);
HybridOptimum hybrid_optimum(HybridRegime regime, double M, double epsilon, double alpha);

/// One line per row: scenario,method,quantity,expression,value,constants_known,tilde.
std::string cost_table_csv(const std::vector<CostRecord>& records);

}  // namespace gradeval
