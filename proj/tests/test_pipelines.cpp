#include <doctest.h>

#include "gradeval/pipelines.hpp"
#include "support/reference.hpp"

using namespace gradeval;

namespace {

StatePrepOracle basis(int qubits, std::uint64_t index) {
  return StatePrepOracle::from_state(Vector::Unit(Eigen::Index{1} << qubits, static_cast<Eigen::Index>(index)));
}

StatePrepOracle plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return StatePrepOracle::from_state(v);
}

double success_fraction(GradientPipeline& pipeline, int trials, std::uint64_t seed) {
  int ok = 0;
  for (int t = 0; t < trials; ++t) ok += pipeline.run(seed, static_cast<std::uint64_t>(t)).success ? 1 : 0;
  return static_cast<double>(ok) / trials;
}

/// C = <psi| e^{iHt} A e^{-iHt} B |psi> by explicit series exponentials.
ref::C correlation_reference(const ref::Mat& H, const ref::Mat& A, const ref::Mat& B, double t, const ref::Vec& psi) {
  return psi.dot(ref::expm_minus_i(H, -t) * A * ref::expm_minus_i(H, t) * B * psi);
}

}  // namespace

TEST_CASE("expectation targets") {
  ObservableSet z1z2({Observable::pauli("z1", "ZI", 1.0), Observable::pauli("z2", "IZ", 1.0)});
  // Leftmost label character is qubit 0: |01> has qubit 1 set.
  const auto refs = reference_expectations(z1z2, basis(2, 0b10));
  CHECK(refs[0] == doctest::Approx(1.0));
  CHECK(refs[1] == doctest::Approx(-1.0));
  ObservableSet xz({Observable::pauli("x", "X", 1.0), Observable::pauli("z", "Z", 1.0)});
  const auto refs2 = reference_expectations(xz, plus_state());
  CHECK(refs2[0] == doctest::Approx(1.0));
  CHECK(std::abs(refs2[1]) < 1e-12);
}

TEST_CASE("single observable estimate succeeds often enough") {
  ObservableSet z({Observable::pauli("z", "Z", 1.0)});
  GradientPipeline pipeline(expectation_problem(z, basis(1, 0)), EstimationOptions{});
  CHECK(pipeline.plan().kind == PlanKind::uniform);
  CHECK(success_fraction(pipeline, 60, 1) >= 2.0 / 3.0);
}

TEST_CASE("two-observable estimate and report content") {
  ObservableSet z1z2({Observable::pauli("z1", "ZI", 1.0), Observable::pauli("z2", "IZ", 1.0)});
  const auto report = estimate_expectations(z1z2, basis(2, 0b10), EstimationOptions{}, 3);
  CHECK(report.ids == std::vector<std::string>{"z1", "z2"});
  CHECK(report.estimates.size() == 2);
  CHECK(report.max_error == doctest::Approx(std::max(report.errors[0], report.errors[1])));
  CHECK(report.success == (report.max_error <= 0.1));
  CHECK(report.ledger.u_psi_queries() > 0);
  CHECK(report.ledger.qubit_high_water == report.plan.logical_qubits(2));
  CHECK(report.repetitions.size() == static_cast<std::size_t>(report.plan.T));
  // Same seed, same report.
  const auto again = estimate_expectations(z1z2, basis(2, 0b10), EstimationOptions{}, 3);
  CHECK(again.estimates == report.estimates);
  CHECK(again.labels == report.labels);
}

TEST_CASE("circuit mode agrees with analytic mode") {
  ObservableSet xz({Observable::pauli("x", "X", 1.0), Observable::pauli("z", "Z", 1.0)});
  EstimationOptions circuit;
  circuit.mode = OracleMode::circuit;
  const auto a = estimate_expectations(xz, plus_state(), EstimationOptions{}, 17);
  const auto c = estimate_expectations(xz, plus_state(), circuit, 17);
  CHECK(a.estimates == c.estimates);
  CHECK(c.mode == OracleMode::circuit);
}

TEST_CASE("qubit budget is enforced unless clamping is allowed") {
  ObservableSet xz({Observable::pauli("x", "X", 1.0), Observable::pauli("z", "Z", 1.0)});
  EstimationOptions tight;
  tight.max_qubits = 12;
  CHECK_THROWS_AS(GradientPipeline(expectation_problem(xz, plus_state()), tight), std::invalid_argument);
  tight.allow_clamp = true;
  GradientPipeline clamped(expectation_problem(xz, plus_state()), tight);
  CHECK(clamped.plan().clamped);
  CHECK(clamped.plan().logical_qubits(1) <= 12);
}

TEST_CASE("phase error injection stays deterministic") {
  ObservableSet xz({Observable::pauli("x", "X", 1.0), Observable::pauli("z", "Z", 1.0)});
  EstimationOptions noisy;
  noisy.phase_error = 0.05;
  const auto a = estimate_expectations(xz, plus_state(), noisy, 8);
  const auto b = estimate_expectations(xz, plus_state(), noisy, 8);
  CHECK(a.estimates == b.estimates);
  noisy.phase_error = 0.5;
  CHECK_THROWS(estimate_expectations(xz, plus_state(), noisy, 8));
}

TEST_CASE("general-norm estimate") {
  Vector v(2);
  v << 0.8, 0.6;
  ObservableSet obs({Observable::pauli("x", "X", 1.0), Observable::pauli("z4", "4*Z", 4.0)});
  GradientPipeline pipeline(expectation_problem(obs, StatePrepOracle::from_state(v)), EstimationOptions{});
  CHECK(pipeline.plan().kind == PlanKind::general);
  CHECK(pipeline.problem().references[1] == doctest::Approx(4.0 * (0.64 - 0.36)));
  CHECK(success_fraction(pipeline, 40, 2) >= 2.0 / 3.0);
}

TEST_CASE("correlation references") {
  SUBCASE("identity probes at zero time") {
    CorrelationSpec spec{Hamiltonian::pauli("Z"), {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}, {0.0, 0.0},
                         Matrix::Identity(2, 2), CorrelationPart::real};
    for (const auto& c : reference_correlations(spec, basis(1, 0))) {
      CHECK(c.real() == doctest::Approx(1.0));
      CHECK(std::abs(c.imag()) < 1e-15);
    }
  }
  SUBCASE("closed form e^{2it}") {
    CorrelationSpec spec{Hamiltonian::pauli("Z"), {pauli_string_matrix("X")}, {kPi / 4}, pauli_string_matrix("X"),
                         CorrelationPart::real};
    const auto c = reference_correlations(spec, basis(1, 0));
    CHECK(std::abs(c[0].real()) < 1e-15);
    CHECK(c[0].imag() == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("series oracle on a two-qubit instance") {
    const ref::Mat H = 0.5 * ref::pauli_string("XX") + 0.3 * ref::pauli_string("ZI") + 0.2 * ref::pauli_string("IZ");
    CorrelationSpec spec{Hamiltonian::pauli("0.5*XX + 0.3*ZI + 0.2*IZ"),
                         {pauli_string_matrix("ZI"), pauli_string_matrix("IY")},
                         {0.4, 0.9},
                         pauli_string_matrix("XI"),
                         CorrelationPart::real};
    ref::Random rnd(5);
    const ref::Vec psi = rnd.state(4);
    const auto c = reference_correlations(spec, StatePrepOracle::from_state(psi));
    CHECK(std::abs(c[0] - correlation_reference(H, ref::pauli_string("ZI"), ref::pauli_string("XI"), 0.4, psi)) < 1e-10);
    CHECK(std::abs(c[1] - correlation_reference(H, ref::pauli_string("IY"), ref::pauli_string("XI"), 0.9, psi)) < 1e-10);
  }
  SUBCASE("validation") {
    CorrelationSpec decreasing{Hamiltonian::pauli("Z"), {pauli_string_matrix("X"), pauli_string_matrix("X")},
                               {0.5, 0.2}, pauli_string_matrix("X"), CorrelationPart::real};
    CHECK_THROWS(decreasing.validate());
    Matrix not_unitary = Matrix::Identity(2, 2) * 2.0;
    CorrelationSpec bad{Hamiltonian::pauli("Z"), {not_unitary}, {0.5}, pauli_string_matrix("X"), CorrelationPart::real};
    CHECK_THROWS(bad.validate());
  }
}

TEST_CASE("correlation unitary has zero-point overlap C and gradient components Re/Im C") {
  CorrelationSpec spec{Hamiltonian::pauli("0.5*XX + 0.3*ZI + 0.2*IZ"),
                       {pauli_string_matrix("ZI"), pauli_string_matrix("IZ")},
                       {0.4, 0.9},
                       pauli_string_matrix("XI"),
                       CorrelationPart::real};
  ref::Random rnd(6);
  const auto psi = StatePrepOracle::from_state(rnd.state(4));
  const auto exact = reference_correlations(spec, psi);
  const auto U = correlation_unitary(spec);
  const double h = 1e-5;
  for (auto part : {CorrelationPart::real, CorrelationPart::imaginary}) {
    spec.part = part;
    const auto problem = correlation_problem(spec, psi);
    const HadamardTestFunction f(problem.unitary, problem.psi, problem.variant);
    for (std::size_t j = 0; j < 2; ++j) {
      std::vector<double> plus(2, 0.0), minus(2, 0.0);
      plus[j] = h;
      minus[j] = -h;
      const double grad = problem.sign * (f(plus) - f(minus)) / (2 * h);
      const double want = part == CorrelationPart::real ? exact[j].real() : exact[j].imag();
      CHECK(std::abs(grad - want) < 1e-7);
      CHECK(std::abs(problem.references[j] - want) < 1e-12);
    }
  }
  CHECK(U.dimension() == 2);
}

TEST_CASE("correlation estimates and modulus consistency") {
  CorrelationSpec spec{Hamiltonian::pauli("0.5*XX + 0.3*ZI + 0.2*IZ"),
                       {pauli_string_matrix("ZI"), pauli_string_matrix("IZ")},
                       {0.4, 0.9},
                       pauli_string_matrix("XI"),
                       CorrelationPart::real};
  Vector psi = Vector::Zero(4);
  psi[0] = psi[2] = 1.0 / std::sqrt(2.0);
  const auto prep = StatePrepOracle::from_state(psi);
  const auto exact = reference_correlations(spec, prep);
  const auto re = estimate_correlations(spec, prep, EstimationOptions{}, 10);
  spec.part = CorrelationPart::imaginary;
  const auto im = estimate_correlations(spec, prep, EstimationOptions{}, 10);
  CHECK(re.pipeline == "correlation");
  for (std::size_t j = 0; j < 2; ++j) {
    const double modulus = re.estimates[j] * re.estimates[j] + im.estimates[j] * im.estimates[j];
    CHECK(std::abs(modulus - std::norm(exact[j])) <= 3 * 0.1);
  }
  GradientPipeline pipeline(correlation_problem(spec, prep), EstimationOptions{});
  CHECK(success_fraction(pipeline, 30, 4) >= 2.0 / 3.0);
}

TEST_CASE("lower-bound fixture identities") {
  RealMatrix A(2, 2);
  A << 1, 1, 1, -1;
  RealVector p(2);
  p << 0.5, 0.5;
  const auto inst = build_lowerbound_instance(A, p);
  CHECK(inst.expected[0] == doctest::Approx(1.0));
  CHECK(std::abs(inst.expected[1]) < 1e-15);
  const auto z = reference_expectations(inst.observables, inst.psi);
  CHECK(std::abs(z[0] - 1.0) < 1e-12);
  CHECK(std::abs(z[1]) < 1e-12);
  CHECK(inst.num_qubits == 2 + 1 + 1);

  RealMatrix ones = RealMatrix::Ones(3, 3);
  RealVector q(3);
  q << 0.2, 0.5, 0.3;
  for (double v : build_lowerbound_instance(ones, q).expected) CHECK(v == doctest::Approx(1.0));
  CHECK(fixture_deviation(build_lowerbound_instance(ones, q)) < 1e-12);

  ref::Random rnd(66);
  RealMatrix S(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) S(i, j) = rnd.uniform() < 0.5 ? -1.0 : 1.0;
  }
  for (int j = 0; j < 4; ++j) {
    const auto point = build_lowerbound_instance(S, RealVector::Unit(4, j));
    const auto zz = reference_expectations(point.observables, point.psi);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(zz[static_cast<std::size_t>(i)] - S(i, j)) < 1e-12);
  }

  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int M = rnd.integer(2, 4);
    RealMatrix R(M, M);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) R(i, j) = rnd.uniform() < 0.5 ? -1.0 : 1.0;
    }
    RealVector w(M);
    for (int j = 0; j < M; ++j) w[j] = rnd.uniform(0.01, 1.0);
    w /= w.sum();
    worst = std::max(worst, fixture_deviation(build_lowerbound_instance(R, w)));
  }
  CHECK(worst < 1e-11);

  RealVector bad(2);
  bad << 0.5, 0.6;
  CHECK_THROWS(build_lowerbound_instance(A, bad));
  RealMatrix notsign = A;
  notsign(0, 0) = 0.5;
  CHECK_THROWS(build_lowerbound_instance(notsign, p));
}

TEST_CASE("sampling baseline") {
  ObservableSet obs({Observable::pauli("z1", "ZI", 1.0), Observable::pauli("z2", "IZ", 1.0),
                     Observable::pauli("x1", "XI", 1.0)});
  ref::Random rnd(3);
  const ref::Vec psi = rnd.state(4);
  const auto prep = StatePrepOracle::from_state(psi);
  RngStream rng(2, 0);
  const auto result = sampling_baseline(obs, prep, 300000, rng);
  CHECK(result.groups == 2);
  CHECK(result.ledger.u_psi_queries() == 300000);
  const auto exact = reference_expectations(obs, prep);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(result.estimates[j] - exact[j]) < 0.02);
  RngStream rng2(2, 0);
  CHECK(sampling_baseline(obs, prep, 300000, rng2).estimates == result.estimates);
  RngStream rng3(2, 0);
  CHECK_THROWS(sampling_baseline(obs, prep, 1, rng3));
}
