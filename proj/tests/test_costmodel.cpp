#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "gradeval/costmodel.hpp"

using namespace gradeval;

namespace {

const CostExpression& row(const CostRecord& rec, const std::string& method, const std::string& quantity = "U_psi queries") {
  for (const auto& r : rec.rows) {
    if (r.method == method && r.quantity == quantity) return r;
  }
  FAIL("row not found: " << method << " / " << quantity);
  return rec.rows.front();
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("scenario names round trip") {
  for (const char* name : {"commuting", "noncommuting", "kRDM", "correlation", "hybrid-exp", "hybrid-poly", "tradeoff",
                           "general-norm"}) {
    CHECK(to_string(parse_cost_scenario(name)) == name);
  }
  CHECK_THROWS(parse_cost_scenario("bogus"));
}

TEST_CASE("query-cost rows") {
  CostParams p;
  p.M = 100;
  p.epsilon = 0.01;
  const auto comm = query_cost(CostScenario::commuting, p);
  CHECK(row(comm, "sampling").value() == doctest::Approx(std::log2(100.0) * 1e4));
  CHECK(row(comm, "gradient").value() == doctest::Approx(10.0 * 100.0));
  CHECK(row(comm, "amplitude-estimation").value() == doctest::Approx(1e4));
  CHECK(row(comm, "shadow-tomography").value() == doctest::Approx(std::log2(100.0) * 1e8));
  CHECK(row(comm, "gradient").tilde);
  CHECK_FALSE(row(comm, "gradient").constants_known);
  const auto non = query_cost(CostScenario::noncommuting, p);
  CHECK(row(non, "sampling").value() == doctest::Approx(100.0 * 1e4));

  CostParams rdm;
  rdm.N = 10;
  rdm.k = 1;
  rdm.epsilon = 0.1;
  const auto k = query_cost(CostScenario::krdm, rdm);
  CHECK(row(k, "gradient").value() == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(row(k, "amplitude-estimation").value() == doctest::Approx(1000.0));
  CHECK(row(k, "sampling").value() == doctest::Approx(1000.0));
  CHECK(row(k, "gradient").to_string() == "O~((N)*(1/eps))");
}

TEST_CASE("general-norm query count") {
  CostParams p;
  p.B_bar = 2.0;
  p.epsilon = 0.1;
  p.M = 2;
  p.delta = 1.0 / 3.0;
  const double ratio = 20.0;
  const double expected = ratio * std::pow(std::log2(ratio), 1.5) * std::log2(std::log2(ratio)) * std::log2(6.0);
  const auto rec = query_cost(CostScenario::general_norm, p);
  CHECK(rec.rows.front().value() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rec.rows.front().value() == doctest::Approx(981.0).epsilon(1e-3));

  CostParams from_bounds;
  from_bounds.bounds = {1.0, 4.0};
  from_bounds.epsilon = 0.1;
  from_bounds.delta = 0.1;
  const double r = std::sqrt(17.0) / 0.1;
  CHECK(query_cost(CostScenario::general_norm, from_bounds).rows.front().value() ==
        doctest::Approx(r * std::pow(std::log2(r), 1.5) * std::log2(std::log2(r)) * std::log2(20.0)));
}

TEST_CASE("correlation costs scale as printed") {
  CostParams p;
  p.M = 16;
  p.epsilon = 0.1;
  p.Delta = 0.5;
  const auto rec = query_cost(CostScenario::correlation, p);
  CHECK(row(rec, "gradient", "time evolution (evenly spaced)").value() == doctest::Approx(64.0 * 0.5 / 0.1));
  CHECK(row(rec, "amplitude-estimation", "time evolution (evenly spaced, printed)").value() ==
        doctest::Approx(256.0 * 0.25 / 0.1));
  // Summing j Delta over the same grid.
  CHECK(row(rec, "amplitude-estimation", "time evolution").value() == doctest::Approx(0.5 * 136.0 / 0.1));
  CHECK(row(rec, "gradient").value() == doctest::Approx(4.0 / 0.1));
}

TEST_CASE("trade-off endpoints and monotonicity") {
  const double M = 400, N = 12, eps = 0.05;
  const auto one = tradeoff_groups(M, N, eps, 1);
  CHECK(one.queries == doctest::Approx(std::sqrt(M) / eps));
  CHECK(one.qubits == doctest::Approx(N + M));
  CHECK(one.evolution == doctest::Approx(M / eps));
  const auto all = tradeoff_groups(M, N, eps, M);
  CHECK(all.queries == doctest::Approx(M / eps));
  CHECK(all.qubits == doctest::Approx(N + 1));
  CHECK(all.evolution == doctest::Approx(M / eps));
  double q = 0, s = 1e300;
  for (double g = 1; g <= M; g *= 2) {
    const auto t = tradeoff_groups(M, N, eps, g);
    CHECK(t.queries >= q);
    CHECK(t.qubits <= s);
    q = t.queries;
    s = t.qubits;
  }
  CHECK_THROWS(tradeoff_groups(M, N, eps, 0.5));
  CHECK_THROWS(tradeoff_groups(M, N, eps, M + 1));
}

TEST_CASE("exponential hybrid optimum") {
  const auto opt = hybrid_optimum(HybridRegime::exponential, 1e4, 0.1, 1.0);
  CHECK(opt.K == doctest::Approx(std::log(25.0)).epsilon(1e-14));
  CHECK(opt.K == doctest::Approx(3.22).epsilon(1e-3));
  const auto small = hybrid_optimum(HybridRegime::exponential, 50, 0.1, 1.0);
  CHECK(small.K == 0.0);
  CHECK(small.gradient_only);
  CHECK(small.cost == doctest::Approx(std::sqrt(50.0) / 0.1));

  std::mt19937 gen(8);
  for (int draw = 0; draw < 20; ++draw) {
    const double alpha = std::uniform_real_distribution<double>(0.3, 3.0)(gen);
    const double M = std::pow(10.0, std::uniform_real_distribution<double>(4.0, 8.0)(gen));
    const double eps = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, -0.5)(gen));
    const auto o = hybrid_optimum(HybridRegime::exponential, M, eps, alpha);
    const double step = 1e-3;
    double best_K = 0.0, best = hybrid_cost(HybridRegime::exponential, M, eps, alpha, 0.0);
    for (double K = step; K <= 60.0; K += step) {
      const double c = hybrid_cost(HybridRegime::exponential, M, eps, alpha, K);
      if (c < best) {
        best = c;
        best_K = K;
      }
    }
    CHECK(std::abs(best_K - o.K) <= step);
  }
}

TEST_CASE("polynomial hybrid exponent") {
  for (double alpha : {1.5, 2.0, 4.0}) {
    std::vector<double> lx, ly;
    for (double e = -3.0; e <= -1.0; e += 0.25) {
      const double eps = std::pow(10.0, e);
      lx.push_back(std::log(1.0 / eps));
      ly.push_back(std::log(hybrid_optimum(HybridRegime::polynomial, 1e8, eps, alpha).cost));
    }
    CHECK(std::abs(slope(lx, ly) - 2.0 * alpha / (1.0 + alpha)) < 0.05);
  }
  CostParams p;
  p.M = 1e6;
  p.epsilon = 0.01;
  for (double alpha : {1.0001, 1e4}) {
    p.alpha = alpha;
    const auto rec = query_cost(CostScenario::hybrid_poly, p);
    const auto& scaling = row(rec, "hybrid-scaling");
    const double exponent = scaling.terms.front().factors[1].exponent;
    CHECK(exponent == doctest::Approx(alpha < 2 ? 1.0 : 2.0).epsilon(1e-3));
  }
  CHECK_THROWS(hybrid_optimum(HybridRegime::polynomial, 1e6, 0.01, 1.0));
}

TEST_CASE("missing parameters are named") {
  CostParams p;
  p.epsilon = 0.1;
  try {
    query_cost(CostScenario::commuting, p);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("'M'") != std::string::npos);
  }
  CHECK_THROWS(query_cost(CostScenario::tradeoff, p));
}

TEST_CASE("CSV table") {
  CostParams p;
  p.N = 10;
  p.k = 1;
  p.epsilon = 0.1;
  const auto csv = cost_table_csv({query_cost(CostScenario::krdm, p)});
  CHECK(csv.rfind("scenario,method,quantity,expression,value,constants_known,tilde\n", 0) == 0);
  CHECK(csv.find("kRDM,gradient,\"U_psi queries\",\"O~((N)*(1/eps))\",100,false,true") != std::string::npos);
}
