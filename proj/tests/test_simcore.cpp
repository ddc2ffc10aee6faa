#include <doctest.h>

#include "gradeval/simcore.hpp"
#include "support/reference.hpp"

using namespace gradeval;

namespace {

RegisterLayout single(const char* name, int width) { return RegisterLayout().add(name, width); }

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

Circuit random_circuit(ref::Random& rnd, int qubits, int depth) {
  Circuit c(qubits);
  for (int d = 0; d < depth; ++d) {
    const int kind = rnd.integer(0, 2);
    if (kind == 0) {
      c.append(rnd.unitary(2), {rnd.integer(0, qubits - 1)});
    } else {
      int a = rnd.integer(0, qubits - 1);
      int b = (a + rnd.integer(1, qubits - 1)) % qubits;
      if (kind == 1) c.append(rnd.unitary(4), {a, b});
      else c.append(rnd.unitary(2), {a}, {b});
    }
  }
  return c;
}

}  // namespace

TEST_CASE("elementary gates on single qubits") {
  StateVector s(single("q", 1));
  apply_gate(s, gates::pauli_x(), std::vector<int>{0});
  CHECK(std::abs(s.amplitudes()[0]) == 0.0);
  CHECK(s.amplitudes()[1] == Complex(1.0, 0.0));

  StateVector h(single("q", 1));
  apply_gate(h, gates::hadamard(), std::vector<int>{0});
  CHECK(h.amplitudes()[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(h.amplitudes()[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("controlled gate with inactive control leaves the state unchanged") {
  RegisterLayout layout = RegisterLayout().add("control", 1).add("target", 1);
  StateVector s(layout);
  s.set_basis_state(0b10);  // control 0, target 1
  const Vector before = s.amplitudes();
  apply_gate(s, gates::pauli_x(), std::vector<int>{1}, std::vector<int>{0});
  CHECK(s.amplitudes() == before);
}

TEST_CASE("control locality is bit-exact") {
  ref::Random rnd(11);
  RegisterLayout layout = RegisterLayout().add("a", 2).add("b", 2);
  StateVector s(layout, rnd.state(16));
  const Vector before = s.amplitudes();
  apply_gate(s, rnd.unitary(4), std::vector<int>{0, 1}, std::vector<int>{2, 3});
  for (std::size_t i = 0; i < 16; ++i) {
    if (((i >> 2) & 3U) != 3U) CHECK(s.amplitudes()[static_cast<Eigen::Index>(i)] == before[static_cast<Eigen::Index>(i)]);
  }
}

TEST_CASE("gate application matches the Kronecker-product matrix") {
  ref::Random rnd(3);
  const ref::Mat u = rnd.unitary(2);
  StateVector s(single("q", 3), rnd.state(8));
  const Vector psi = s.amplitudes();
  apply_gate(s, u, std::vector<int>{1});
  const ref::Mat full = ref::kron(ref::Mat::Identity(2, 2), ref::kron(u, ref::Mat::Identity(2, 2)));
  CHECK(max_abs_diff(s.amplitudes(), full * psi) < 1e-14);
}

TEST_CASE("appending rejects invalid gates") {
  Circuit c(2);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(c.append(bad, {0}), std::invalid_argument);
  CHECK_THROWS_AS(c.append(gates::hadamard(), {2}), std::invalid_argument);
  CHECK_THROWS_AS(c.append(gates::pauli_x(), {0}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(c.append(gates::swap(), {0}), std::invalid_argument);
}

TEST_CASE("norm preservation and adjoint round trip on random 3-qubit circuits") {
  ref::Random rnd(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Circuit c = random_circuit(rnd, 3, 25);
    StateVector s(single("q", 3), rnd.state(8));
    const Vector input = s.amplitudes();
    c.apply(s);
    CHECK(std::abs(s.norm_squared() - 1.0) < 1e-9);
    c.adjoint().apply(s);
    CHECK(max_abs_diff(s.amplitudes(), input) < 1e-9);
  }
}

TEST_CASE("circuit matrix equals the product of its gates") {
  ref::Random rnd(5);
  const Circuit c = random_circuit(rnd, 3, 12);
  const Matrix u = c.to_matrix();
  for (int col = 0; col < 8; ++col) {
    StateVector s(single("q", 3));
    s.set_basis_state(static_cast<std::uint64_t>(col));
    c.apply(s);
    CHECK(max_abs_diff(s.amplitudes(), u.col(col)) < 1e-13);
  }
}

TEST_CASE("grid values and labels") {
  CHECK(grid_value(0, 1) == -0.25);
  CHECK(grid_value(1, 1) == 0.25);
  CHECK(grid_value(2, 2) == 0.125);
  for (int n = 1; n <= 5; ++n) {
    for (std::uint64_t j = 0; j < (1U << n); ++j) {
      CHECK(grid_value(j, n) == doctest::Approx(ref::grid(j, n)).epsilon(1e-15));
      CHECK(grid_label(grid_value(j, n), n) == j);
    }
  }
}

TEST_CASE("QFT matrices match their kernels entrywise") {
  for (int n = 1; n <= 3; ++n) {
    const auto layout = single("k", n);
    const Matrix grid_inv = grid_qft_inverse_circuit(layout.at("k"), n).to_matrix();
    CHECK((grid_inv - ref::grid_inverse_qft_kernel(n)).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix textbook = qft_circuit(layout.at("k"), n).to_matrix();
    CHECK((textbook - ref::qft_kernel(n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("inverse QFT of the zero-phase superposition on G_1 has equal magnitudes") {
  // Both labels pick up 2 cos(pi/4)/2 = 1/sqrt(2); the output is not a basis state.
  StateVector s(single("k", 1));
  s.amplitudes() << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  apply_qft_inverse(s, "k");
  CHECK(std::abs(s.amplitudes()[0]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(s.amplitudes()[1]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("QFT then inverse QFT is the identity") {
  ref::Random rnd(9);
  for (int n = 1; n <= 4; ++n) {
    StateVector s(single("k", n), rnd.state(1 << n));
    const Vector input = s.amplitudes();
    apply_qft(s, "k");
    apply_qft_inverse(s, "k");
    CHECK(max_abs_diff(s.amplitudes(), input) < 1e-10);
  }
}

TEST_CASE("Fourier characters on G_2 map to single labels") {
  const int n = 2;
  for (std::uint64_t k0 = 0; k0 < 4; ++k0) {
    StateVector s(single("k", n));
    for (std::uint64_t x = 0; x < 4; ++x) {
      s.amplitudes()[static_cast<Eigen::Index>(x)] = std::polar(0.5, 2.0 * kPi * 4.0 * grid_value(x, n) * grid_value(k0, n));
    }
    apply_qft_inverse(s, "k");
    for (std::uint64_t k = 0; k < 4; ++k) {
      CHECK(std::abs(s.amplitudes()[static_cast<Eigen::Index>(k)]) == doctest::Approx(k == k0 ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("measurement") {
  SUBCASE("basis state is certain") {
    StateVector s(single("q", 1));
    s.set_basis_state(1);
    RngStream rng(1, 0);
    for (int i = 0; i < 100; ++i) CHECK(measure_all(s, rng).basis_index == 1);
  }
  SUBCASE("uniform superposition frequency") {
    StateVector s(single("q", 1));
    apply_gate(s, gates::hadamard(), std::vector<int>{0});
    RngStream rng(2024, 0);
    Sampler sampler(s);
    int ones = 0;
    for (int i = 0; i < 10000; ++i) ones += static_cast<int>(sampler.sample_index(rng));
    CHECK(std::abs(ones / 10000.0 - 0.5) < 0.02);
  }
  SUBCASE("product state reports per-register labels") {
    RegisterLayout layout = RegisterLayout().add("a", 1).add("b", 1);
    StateVector s(layout);
    s.set_basis_state(0b10);
    RngStream rng(5, 0);
    const auto out = measure_all(s, rng);
    REQUIRE(out.registers.size() == 2);
    CHECK(out.registers[0].label == 0);
    CHECK(out.registers[1].label == 1);
    CHECK(out.registers[1].value == 0.25);
  }
}

TEST_CASE("random streams are reproducible and independent") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 50; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);
  RngStream parent(42, 3);
  auto s1 = parent.substream(1);
  auto s1b = RngStream(42, 3).substream(1);
  auto s2 = parent.substream(2);
  CHECK(s1() == s1b());
  CHECK(s1() != s2());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("layout composition") {
  RegisterLayout layout = RegisterLayout().add("x", 2).add("y", 3);
  CHECK(layout.total_width() == 5);
  const std::uint64_t labels[] = {3, 5};
  const auto idx = layout.compose(labels);
  CHECK(layout.at("x").label_of(idx) == 3);
  CHECK(layout.at("y").label_of(idx) == 5);
  CHECK_THROWS(layout.at("z"));
}
