#include "gradeval/costmodel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gradeval {

namespace {

double need(const std::optional<double>& v, const char* name, bool positive = true) {
  if (!v) throw std::invalid_argument(std::string("missing cost parameter '") + name + "'");
  if (!std::isfinite(*v) || (positive && !(*v > 0.0))) {
    throw std::invalid_argument(std::string("cost parameter '") + name + "' must be positive");
  }
  return *v;
}

CostFactor pw(std::string symbol, double base, double exponent = 1.0) {
  return CostFactor{std::move(symbol), base, CostFactor::Kind::power, exponent};
}
CostFactor lg(std::string symbol, double base, double exponent = 1.0) {
  return CostFactor{std::move(symbol), base, CostFactor::Kind::log, exponent};
}
CostFactor lglg(std::string symbol, double base, double exponent = 1.0) {
  return CostFactor{std::move(symbol), base, CostFactor::Kind::loglog, exponent};
}

CostExpression expr(std::string method, std::string quantity, std::vector<CostTerm> terms, bool tilde,
                    std::string note = {}) {
  return CostExpression{std::move(method), std::move(quantity), std::move(terms), tilde, false, std::move(note)};
}

CostTerm term(std::vector<CostFactor> factors, double coefficient = 1.0) {
  return CostTerm{coefficient, std::move(factors)};
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(CostScenario s) {
  switch (s) {
    case CostScenario::commuting: return "commuting";
    case CostScenario::noncommuting: return "noncommuting";
    case CostScenario::krdm: return "kRDM";
    case CostScenario::correlation: return "correlation";
    case CostScenario::hybrid_exp: return "hybrid-exp";
    case CostScenario::hybrid_poly: return "hybrid-poly";
    case CostScenario::tradeoff: return "tradeoff";
    case CostScenario::general_norm: return "general-norm";
  }
  return "unknown";
}

CostScenario parse_cost_scenario(const std::string& text) {
  for (auto s : {CostScenario::commuting, CostScenario::noncommuting, CostScenario::krdm, CostScenario::correlation,
                 CostScenario::hybrid_exp, CostScenario::hybrid_poly, CostScenario::tradeoff,
                 CostScenario::general_norm}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown cost scenario '" + text + "'");
}

double CostFactor::value() const {
  switch (kind) {
    case Kind::power: return std::pow(base, exponent);
    case Kind::log: return std::pow(std::log2(base), exponent);
    case Kind::loglog: return std::pow(std::log2(std::log2(base)), exponent);
  }
  return 0.0;
}

double CostTerm::value() const {
  double v = coefficient;
  for (const auto& f : factors) v *= f.value();
  return v;
}

double CostExpression::value() const {
  double v = 0.0;
  for (const auto& t : terms) v += t.value();
  return v;
}

std::string CostExpression::to_string() const {
  std::ostringstream os;
  os << (tilde ? "O~(" : "O(");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) os << " + ";
    const auto& t = terms[i];
    if (t.coefficient != 1.0 || t.factors.empty()) os << format_number(t.coefficient) << (t.factors.empty() ? "" : "*");
    for (std::size_t j = 0; j < t.factors.size(); ++j) {
      const auto& f = t.factors[j];
      if (j > 0) os << "*";
      const char* wrap = f.kind == CostFactor::Kind::power ? "" : (f.kind == CostFactor::Kind::log ? "log" : "loglog");
      if (f.kind == CostFactor::Kind::power) os << "(" << f.symbol << ")";
      else os << wrap << "(" << f.symbol << ")";
      if (f.exponent != 1.0) os << "^" << format_number(f.exponent);
    }
  }
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

TradeoffCost tradeoff_groups(double M, double N, double epsilon, double g) {
  if (!(M >= 1.0)) throw std::invalid_argument("M must be >= 1");
  if (!(N >= 0.0)) throw std::invalid_argument("N must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(g >= 1.0 && g <= M)) throw std::invalid_argument("group count g must lie in [1, M]");
  return TradeoffCost{std::sqrt(g * M) / epsilon, N + M / g, M / epsilon};
}

double hybrid_cost(HybridRegime regime, double M, double epsilon, double alpha, double K) {
  if (regime == HybridRegime::exponential) {
    return std::sqrt(M * std::exp(-alpha * K)) / epsilon + K / (epsilon * epsilon);
  }
  return std::sqrt(M * std::pow(K, 1.0 - alpha)) / epsilon + K / (epsilon * epsilon);
}

HybridOptimum hybrid_optimum(HybridRegime regime, double M, double epsilon, double alpha) {
  if (!(M > 0.0)) throw std::invalid_argument("M must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (regime == HybridRegime::exponential) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive in the exponential regime");
    if (std::sqrt(M) * epsilon <= 1.0) return HybridOptimum{0.0, std::sqrt(M) / epsilon, true};
    const double K = std::max(0.0, std::log(alpha * alpha * M * epsilon * epsilon / 4.0) / alpha);
    return HybridOptimum{K, hybrid_cost(regime, M, epsilon, alpha, K), K == 0.0};
  }
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1 in the polynomial regime");
  const double K =
      std::max(1.0, std::pow((alpha - 1.0) * (alpha - 1.0) * M * epsilon * epsilon / 4.0, 1.0 / (1.0 + alpha)));
  return HybridOptimum{K, hybrid_cost(regime, M, epsilon, alpha, K), false};
}

// ---------------------------------------------------------------------------

CostRecord query_cost(CostScenario scenario, const CostParams& p) {
  CostRecord rec{scenario, {}, std::nullopt};
  const char* queries = "U_psi queries";
  switch (scenario) {
    case CostScenario::commuting:
    case CostScenario::noncommuting: {
      const double M = need(p.M, "M");
      const double inv = 1.0 / need(p.epsilon, "epsilon");
      const bool comm = scenario == CostScenario::commuting;
      rec.rows.push_back(comm ? expr("sampling", queries, {term({lg("M", std::max(M, 2.0)), pw("1/eps", inv, 2)})}, false)
                              : expr("sampling", queries, {term({pw("M", M), pw("1/eps", inv, 2)})}, true));
      rec.rows.push_back(expr("amplitude-estimation", queries, {term({pw("M", M), pw("1/eps", inv)})}, true));
      rec.rows.push_back(expr("shadow-tomography", queries, {term({lg("M", std::max(M, 2.0)), pw("1/eps", inv, 4)})}, false));
      rec.rows.push_back(expr("gradient", queries, {term({pw("M", M, 0.5), pw("1/eps", inv)})}, true));
      break;
    }
    case CostScenario::krdm: {
      const double N = need(p.N, "N");
      const double k = need(p.k, "k");
      const double inv = 1.0 / need(p.epsilon, "epsilon");
      rec.rows.push_back(expr("sampling", queries, {term({pw("N", N, k), pw("1/eps", inv, 2)})}, true));
      rec.rows.push_back(expr("amplitude-estimation", queries, {term({pw("N", N, 2 * k), pw("1/eps", inv)})}, true));
      rec.rows.push_back(expr("shadow-tomography", queries, {term({pw("k", k), lg("N", std::max(N, 2.0)), pw("1/eps", inv, 4)})}, false));
      rec.rows.push_back(expr("gradient", queries, {term({pw("N", N, k), pw("1/eps", inv)})}, true));
      break;
    }
    case CostScenario::correlation: {
      const double inv = 1.0 / need(p.epsilon, "epsilon");
      std::vector<double> t = p.times;
      double M = p.M.value_or(static_cast<double>(t.size()));
      if (t.empty()) {
        const double Delta = need(p.Delta, "Delta");
        M = need(p.M, "M");
        for (int j = 1; j <= static_cast<int>(M); ++j) t.push_back(j * Delta);
      }
      if (!(M >= 1.0)) throw std::invalid_argument("cost parameter 'M' must be >= 1");
      double sum_t = 0.0;
      for (double v : t) sum_t += v;
      const double t_max = t.back();
      rec.rows.push_back(expr("gradient", queries, {term({pw("M", M, 0.5), pw("1/eps", inv)})}, true));
      rec.rows.push_back(expr("gradient", "time evolution", {term({pw("M", M, 0.5), pw("t_M", t_max), pw("1/eps", inv)})}, true));
      rec.rows.push_back(expr("amplitude-estimation", queries, {term({pw("M", M), pw("1/eps", inv)})}, true));
      rec.rows.push_back(expr("amplitude-estimation", "time evolution", {term({pw("sum t_j", sum_t), pw("1/eps", inv)})}, true,
                              "per-point estimation, each point costing its own evolution time"));
      if (p.Delta && p.times.empty()) {
        const double Delta = *p.Delta;
        rec.rows.push_back(expr("gradient", "time evolution (evenly spaced)",
                                {term({pw("M", M, 1.5), pw("Delta", Delta), pw("1/eps", inv)})}, true));
        rec.rows.push_back(expr("amplitude-estimation", "time evolution (evenly spaced, printed)",
                                {term({pw("M", M, 2), pw("Delta", Delta, 2), pw("1/eps", inv)})}, true,
                                "printed form; summing t_j = j Delta gives M^2 Delta / eps"));
      }
      break;
    }
    case CostScenario::hybrid_exp:
    case CostScenario::hybrid_poly: {
      const double M = need(p.M, "M");
      const double eps = need(p.epsilon, "epsilon");
      const double alpha = need(p.alpha, "alpha");
      const auto regime = scenario == CostScenario::hybrid_exp ? HybridRegime::exponential : HybridRegime::polynomial;
      const auto opt = hybrid_optimum(regime, M, eps, alpha);
      rec.optimal_K = opt.K;
      const double inv = 1.0 / eps;
      if (regime == HybridRegime::exponential) {
        rec.rows.push_back(expr("hybrid", queries,
                                {term({pw("M e^{-alpha K}", M * std::exp(-alpha * opt.K), 0.5), pw("1/eps", inv)}),
                                 term({pw("K", opt.K), pw("1/eps", inv, 2)})},
                                true, opt.gradient_only ? "gradient-only regime (sqrt(M) eps <= 1)" : "at the optimal K"));
      } else {
        rec.rows.push_back(expr("hybrid", queries,
                                {term({pw("M K^{1-alpha}", M * std::pow(opt.K, 1.0 - alpha), 0.5), pw("1/eps", inv)}),
                                 term({pw("K", opt.K), pw("1/eps", inv, 2)})},
                                true, "at the optimal K"));
        rec.rows.push_back(expr("hybrid-scaling", queries,
                                {term({pw("M", M, 1.0 / (1.0 + alpha)), pw("1/eps", inv, 2.0 * alpha / (1.0 + alpha))})},
                                true));
      }
      break;
    }
    case CostScenario::tradeoff: {
      const double M = need(p.M, "M");
      const double N = need(p.N, "N", false);
      const double eps = need(p.epsilon, "epsilon");
      const double g = need(p.g, "g");
      tradeoff_groups(M, N, eps, g);
      const double inv = 1.0 / eps;
      rec.rows.push_back(expr("grouped-gradient", queries, {term({pw("g M", g * M, 0.5), pw("1/eps", inv)})}, true));
      rec.rows.push_back(expr("grouped-gradient", "qubits", {term({pw("N", N)}), term({pw("M/g", M / g)})}, true));
      rec.rows.push_back(expr("grouped-gradient", "time evolution", {term({pw("M", M), pw("1/eps", inv)})}, true));
      break;
    }
    case CostScenario::general_norm: {
      const double eps = need(p.epsilon, "epsilon");
      const double delta = need(p.delta, "delta");
      double M = p.M.value_or(static_cast<double>(p.bounds.size()));
      double B = 0.0;
      if (p.B_bar) {
        B = need(p.B_bar, "B_bar");
      } else {
        if (p.bounds.empty()) throw std::invalid_argument("missing cost parameter 'B_bar' (or 'bounds')");
        for (double b : p.bounds) B += b * b;
        B = std::sqrt(B);
      }
      if (!(M >= 1.0)) throw std::invalid_argument("missing cost parameter 'M'");
      const double ratio = B / eps;
      if (!(ratio > 2.0)) throw std::invalid_argument("general-norm cost needs B_bar/epsilon > 2");
      rec.rows.push_back(expr("gradient", queries,
                              {term({pw("B/eps", ratio), lg("B/eps", ratio, 1.5), lglg("B/eps", ratio), lg("M/delta", M / delta)})},
                              false));
      break;
    }
  }
  return rec;
}

std::string cost_table_csv(const std::vector<CostRecord>& records) {
  std::ostringstream os;
  os.precision(12);
  os << "scenario,method,quantity,expression,value,constants_known,tilde\n";
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      os << to_string(rec.scenario) << ',' << row.method << ",\"" << row.quantity << "\",\"" << row.to_string()
         << "\"," << row.value() << ',' << (row.constants_known ? "true" : "false") << ','
         << (row.tilde ? "true" : "false") << '\n';
    }
  }
  return os.str();
}

}  // namespace gradeval
