#include <doctest.h>

#include <algorithm>
#include <random>

#include "gradeval/gradient.hpp"
#include "support/reference.hpp"

using namespace gradeval;

namespace {

/// Closed-form central-difference weights: (-1)^{l+1} (m!)^2 / (l (m-l)! (m+l)!).
long double closed_form_coefficient(int m, int l) {
  if (l == 0) return 0.0L;
  long double v = 1.0L;
  // (m!)^2 / ((m-|l|)! (m+|l|)!) as a product of ratios to stay exact-ish.
  const int a = std::abs(l);
  for (int i = 1; i <= a; ++i) v *= static_cast<long double>(m - a + i) / static_cast<long double>(m + i);
  v /= static_cast<long double>(a);
  const long double sign = (a % 2 == 1) ? 1.0L : -1.0L;
  return l > 0 ? sign * v : -sign * v;
}

struct PlanOracle {
  int m, n, T;
  double r, S;
};

PlanOracle uniform_oracle(double M, double eps, double delta, double c) {
  PlanOracle o{};
  o.m = std::max(1, static_cast<int>(std::ceil(std::log2(c * std::sqrt(M) / eps))));
  const double base = c * o.m * std::sqrt(M);
  o.r = 1.0 / (9.0 * base * std::pow(81.0 * 8.0 * 42.0 * ref::pi * base / eps, 1.0 / (2.0 * o.m)));
  o.S = 4.0 / (eps * o.r);
  o.n = std::max(1, static_cast<int>(std::ceil(std::log2(12.0 * c / eps))));
  o.T = static_cast<int>(std::ceil(18.0 * std::log(2.0 * M / delta)));
  return o;
}

}  // namespace

TEST_CASE("difference coefficients for small orders") {
  const auto a1 = difference_coefficients(1);
  CHECK(a1 == std::vector<double>{-0.5, 0.0, 0.5});
  const auto a2 = difference_coefficients(2);
  const double expected[] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
  for (int i = 0; i < 5; ++i) CHECK(a2[static_cast<std::size_t>(i)] == doctest::Approx(expected[i]).epsilon(1e-15));
  CHECK_THROWS(difference_coefficients(0));
}

TEST_CASE("difference coefficients match the closed form") {
  for (int m = 1; m <= 8; ++m) {
    const auto a = difference_coefficients<long double>(m);
    for (int l = -m; l <= m; ++l) {
      CHECK(std::abs(static_cast<double>(a[static_cast<std::size_t>(l + m)] - closed_form_coefficient(m, l))) < 1e-14);
    }
  }
}

TEST_CASE("difference moments and antisymmetry") {
  for (int m = 1; m <= 6; ++m) {
    const auto a = difference_coefficients<long double>(m);
    for (int l = 1; l <= m; ++l) CHECK(a[static_cast<std::size_t>(m + l)] == -a[static_cast<std::size_t>(m - l)]);
    for (int p = 0; p <= 2 * m; ++p) {
      const long double want = p == 1 ? 1.0L : 0.0L;
      CHECK(std::abs(static_cast<double>(difference_moment(a, p) - want)) < 1e-12);
    }
  }
}

TEST_CASE("central differences differentiate polynomials of degree 2m exactly") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int m = 1; m <= 4; ++m) {
    const auto a = difference_coefficients(m);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(2 * m + 1));
      for (auto& v : c) v = coef(gen);
      const double h = 0.05;
      auto poly = [&](double x) {
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
        return acc;
      };
      double d = 0.0;
      for (int l = -m; l <= m; ++l) d += a[static_cast<std::size_t>(l + m)] * poly(l * h);
      CHECK(std::abs(d / h - c[1]) < 1e-9);
    }
  }
}

TEST_CASE("uniform plan against the closed-form parameters") {
  for (double M : {1.0, 2.0, 4.0, 16.0}) {
    for (double eps : {0.1, 0.05}) {
      const auto plan = solve_plan_uniform(static_cast<std::size_t>(M), eps, 1.0 / 3.0);
      const auto o = uniform_oracle(M, eps, 1.0 / 3.0, 2.0);
      CHECK(plan.m == o.m);
      CHECK(plan.r == doctest::Approx(o.r).epsilon(1e-12));
      CHECK(plan.S == doctest::Approx(o.S).epsilon(1e-12));
      CHECK(plan.T == o.T);
      for (int n : plan.n) CHECK(n == o.n);
      CHECK(plan.x_max == doctest::Approx(o.r * o.m).epsilon(1e-12));
    }
  }
  const auto p4 = solve_plan_uniform(4, 0.05, 1.0 / 3.0);
  CHECK(p4.m == 7);

  const auto p2 = solve_plan_uniform(2, 0.1, 1.0 / 3.0);
  CHECK(p2.m == 5);
  CHECK(p2.n == std::vector<int>{8, 8});
  CHECK(p2.T == 45);
  CHECK(p2.r == doctest::Approx(0.0015381318885596).epsilon(1e-10));
  CHECK(p2.S == doctest::Approx(26005.572277).epsilon(1e-9));
  CHECK(p2.logical_qubits(1) == 1 + 1 + 16);
  CHECK(range_condition_holds(p2));
}

TEST_CASE("x_max decreases as M grows") {
  double previous = 1e300;
  for (std::size_t M : {1U, 4U, 16U, 64U}) {
    const auto plan = solve_plan_uniform(M, 0.05, 1.0 / 3.0);
    CHECK(plan.x_max < previous);
    previous = plan.x_max;
  }
}

TEST_CASE("general plan") {
  const std::vector<double> ones{1.0, 1.0};
  const auto g = solve_plan_general(ones, 0.1, 1.0 / 3.0);
  const auto u = solve_plan_uniform(2, 0.1, 1.0 / 3.0);
  CHECK(g.m == u.m);
  CHECK(g.n == u.n);
  CHECK(g.T == u.T);
  CHECK(g.z_norm == doctest::Approx(u.z_norm));

  const std::vector<double> b14{1.0, 4.0};
  for (double eps : {0.1, 24.0 / 256.0}) {
    const auto p = solve_plan_general(b14, eps, 1.0 / 3.0);
    CHECK(p.n[1] - p.n[0] == 2);
    CHECK(range_condition_holds(p));
  }
  const std::vector<double> b34{3.0, 4.0};
  CHECK(solve_plan_general(b34, 0.1, 1.0 / 3.0).z_norm == doctest::Approx(10.0).epsilon(1e-15));

  const auto p = solve_plan_general(b14, 0.1, 1.0 / 3.0);
  CHECK(1.0 / (p.a_const * p.a_const) + 1.0 / p.b_const == doctest::Approx(1.0 / 2304.0).epsilon(1e-14));
  const std::vector<double> bad{1.0, -1.0};
  CHECK_THROWS(solve_plan_general(bad, 0.1, 1.0 / 3.0));
}

TEST_CASE("qubit budget clamps the widest register") {
  const std::vector<double> b14{1.0, 4.0};
  auto p = solve_plan_general(b14, 0.1, 1.0 / 3.0);
  apply_qubit_budget(p, 1, 16);
  CHECK(p.clamped);
  CHECK(p.logical_qubits(1) <= 16);
  CHECK(p.solved_n == std::vector<int>{8, 10});
  CHECK(p.n == std::vector<int>{7, 7});
  auto q = solve_plan_uniform(2, 0.1, 1.0 / 3.0);
  CHECK_THROWS(apply_qubit_budget(q, 10, 12));
}

TEST_CASE("decode") {
  const auto plan = solve_plan_uniform(1, 0.1, 1.0 / 3.0);
  const int n = plan.n[0];
  const std::uint64_t N = plan.grid_points(0);
  CHECK(decode(plan, grid_value(N / 2, n), 0) == doctest::Approx(N * 0.1 / std::ldexp(1.0, n + 3)).epsilon(1e-15));
  for (std::uint64_t j = 0; j < N; ++j) {
    CHECK(decode(plan, grid_value(j, n), 0) == -decode(plan, grid_value(N - 1 - j, n), 0));
  }
  GradientPlan tiny = plan;
  tiny.n = {1};
  CHECK(decode(tiny, grid_value(0, 1), 0) == doctest::Approx(-0.1 / 8).epsilon(1e-15));
}

TEST_CASE("median aggregation") {
  CHECK(median_aggregate({{0.3, -0.2}}) == std::vector<double>{0.3, -0.2});
  CHECK(median_aggregate({{0.1}, {0.1}, {0.9}}) == std::vector<double>{0.1});
  CHECK(median_aggregate({{4.0}, {1.0}, {3.0}, {2.0}}) == std::vector<double>{2.0});
}

TEST_CASE("median of T repetitions meets the Chernoff target") {
  const std::size_t M = 2;
  const double delta = 1.0 / 3.0;
  const int T = repetitions_for(M, delta);
  CHECK(T == 45);
  std::mt19937 gen(77);
  std::bernoulli_distribution good(2.0 / 3.0);
  std::uniform_real_distribution<double> bad_value(-10.0, 10.0);
  int successes = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(T), std::vector<double>(M));
    for (auto& row : rows) {
      for (auto& v : row) v = good(gen) ? 0.0 : bad_value(gen);
    }
    const auto med = median_aggregate(rows);
    bool ok = true;
    for (double v : med) ok = ok && std::abs(v) <= 0.5;
    successes += ok ? 1 : 0;
  }
  CHECK(successes / 1000.0 >= 1.0 - delta);
}

TEST_CASE("linear objective on the representable lattice is recovered exactly") {
  const auto plan = solve_plan_uniform(1, 0.1, 1.0 / 3.0);
  const std::uint64_t N = plan.grid_points(0);
  for (std::uint64_t j : {std::uint64_t{3}, N / 2 + 17, N - 40}) {
    const double g = plan.epsilon / 4.0 * (static_cast<double>(j) - N / 2.0 + 0.5);
    auto oracle = std::make_shared<GradientPhaseOracle>([g](std::span<const double> x) { return 0.5 + g * x[0]; }, plan);
    // h is exactly linear in k.
    for (std::uint64_t k = 0; k < N; k += 37) {
      CHECK(oracle->phase_table()[k] == doctest::Approx(g * plan.r * grid_value(k, plan.n[0])).epsilon(1e-9));
    }
    Algorithm1Runner runner(plan, oracle);
    ResourceLedger ledger(1);
    RngStream rng(9, j);
    for (int shot = 0; shot < 20; ++shot) {
      const auto out = runner.run(rng, ledger);
      CHECK(out.labels[0] == j);
      CHECK(std::abs(out.estimates[0] - g) < 1e-9);
    }
  }
}

TEST_CASE("zero gradient concentrates at the grid centre") {
  const auto plan = solve_plan_uniform(2, 0.1, 1.0 / 3.0);
  auto oracle = std::make_shared<GradientPhaseOracle>([](std::span<const double>) { return 0.5; }, plan);
  Algorithm1Runner runner(plan, oracle);
  ResourceLedger ledger(2);
  const auto est = estimate_gradient(runner, RngStream(4, 0), ledger);
  for (double v : est.median) CHECK(std::abs(v) <= plan.epsilon);
  CHECK(est.repetitions.size() == static_cast<std::size_t>(plan.T));
  CHECK(ledger.unit_phase_queries == plan.unit_phase_queries * static_cast<std::uint64_t>(plan.T));
}

TEST_CASE("seeded runs are reproducible") {
  const auto plan = solve_plan_uniform(2, 0.1, 1.0 / 3.0);
  auto oracle =
      std::make_shared<GradientPhaseOracle>([](std::span<const double> x) { return 0.5 + 0.3 * x[0] - 0.6 * x[1]; }, plan);
  Algorithm1Runner a(plan, oracle), b(plan, oracle);
  ResourceLedger la(2), lb(2);
  const auto ea = estimate_gradient(a, RngStream(21, 0), la);
  const auto eb = estimate_gradient(b, RngStream(21, 0), lb);
  CHECK(ea.labels == eb.labels);
  CHECK(ea.median == eb.median);
  CHECK(la.u_psi_queries() == lb.u_psi_queries());
}

TEST_CASE("single runs succeed with probability at least 2/3 on random instances") {
  ref::Random rnd(1234);
  int successes = 0, total = 0;
  for (int inst = 0; inst < 6; ++inst) {
    const int M = 1 + inst % 3;
    const int N = 1 + (inst / 3) % 2;
    const double eps = M == 3 ? 0.25 : 0.1;
    std::vector<Observable> obs;
    std::vector<ref::Mat> mats;
    for (int j = 0; j < M; ++j) {
      mats.push_back(rnd.hermitian_with_norm(1 << N, rnd.uniform(0.3, 1.0)));
      obs.push_back(Observable::dense("o" + std::to_string(j), mats.back(), 1.0));
    }
    const ObservableSet set(obs);
    const ref::Vec psi = rnd.state(1 << N);
    const auto plan = solve_plan_uniform(static_cast<std::size_t>(M), eps, 1.0 / 3.0);
    auto f = std::make_shared<HadamardTestFunction>(ParameterizedUnitary::product_of_exponentials(set),
                                                    StatePrepOracle::from_state(psi));
    auto oracle = std::make_shared<GradientPhaseOracle>(f, plan, OracleSettings{});
    Algorithm1Runner runner(plan, oracle);
    ResourceLedger ledger(static_cast<std::size_t>(M));
    for (int t = 0; t < 50; ++t) {
      RngStream rng(100 + static_cast<std::uint64_t>(inst), static_cast<std::uint64_t>(t));
      const auto out = runner.run(rng, ledger);
      bool ok = true;
      for (int j = 0; j < M; ++j) ok = ok && std::abs(out.estimates[static_cast<std::size_t>(j)] - psi.dot(mats[static_cast<std::size_t>(j)] * psi).real()) <= eps;
      successes += ok ? 1 : 0;
      ++total;
    }
  }
  CHECK(total == 300);
  CHECK(static_cast<double>(successes) / total >= 2.0 / 3.0);
}
