#pragma once

// Dense state-vector engine.
//
// Qubit ordering is little-endian: global qubit q is bit q of the basis index.
// Registers occupy contiguous qubit ranges in declaration order, and within a
// register bit b of the register label is global qubit (offset + b).

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gradeval {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Point j of the grid G_n: j/2^n - 1/2 + 1/2^(n+1).
template <typename Scalar = double>
Scalar grid_value(std::uint64_t label, int width) {
  const Scalar size = static_cast<Scalar>(std::uint64_t{1} << width);
  return static_cast<Scalar>(label) / size - Scalar(1) / Scalar(2) + Scalar(1) / (Scalar(2) * size);
}

/// Nearest label of G_n to a real value (clamped to the grid).
std::uint64_t grid_label(double value, int width);

struct QubitRegister {
  std::string name;
  int width = 0;
  int offset = 0;

  int qubit(int bit) const { return offset + bit; }
  std::uint64_t label_of(std::uint64_t basis_index) const {
    return (basis_index >> offset) & ((std::uint64_t{1} << width) - 1);
  }
};

class RegisterLayout {
 public:
  RegisterLayout() = default;

  /// Appends a register after the existing ones.
  RegisterLayout& add(std::string name, int width);

  const QubitRegister& at(std::string_view name) const;
  const QubitRegister* find(std::string_view name) const;
  const std::vector<QubitRegister>& registers() const { return registers_; }
  int total_width() const { return total_width_; }

  /// Basis index for one label per register, in declaration order.
  std::uint64_t compose(std::span<const std::uint64_t> labels) const;

 private:
  std::vector<QubitRegister> registers_;
  int total_width_ = 0;
};

class StateVector {
 public:
  /// |0...0> over the layout.
  explicit StateVector(RegisterLayout layout);
  StateVector(RegisterLayout layout, Vector amplitudes);

  const RegisterLayout& layout() const { return layout_; }
  int num_qubits() const { return layout_.total_width(); }
  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }

  const Vector& amplitudes() const { return amplitudes_; }
  Vector& amplitudes() { return amplitudes_; }

  double norm_squared() const { return amplitudes_.squaredNorm(); }
  void set_basis_state(std::uint64_t basis_index);

 private:
  RegisterLayout layout_;
  Vector amplitudes_;
};

/// Deterministic random stream keyed by (seed, stream id).
///
/// SplitMix64 over a per-stream starting state. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream);

  result_type operator()();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Independent child stream; deterministic in (this stream's key, id).
  RngStream substream(std::uint64_t id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_;
};

struct GateOp {
  Matrix unitary;
  std::vector<int> targets;
  std::vector<int> controls;
  std::string label;
};

/// Applies `gate` to `targets` (targets[0] is the least significant local
/// bit), active only on basis states where every control qubit is 1.
void apply_gate(StateVector& state, const Matrix& gate, std::span<const int> targets,
                std::span<const int> controls = {});

/// Throws std::invalid_argument unless `gate` is unitary within `tolerance`.
void require_unitary(const Matrix& gate, double tolerance = 1e-10);

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int num_qubits) : num_qubits_(num_qubits) {}

  /// Validated on append: dimension, unitarity, qubit ranges and overlap.
  Circuit& append(Matrix gate, std::vector<int> targets, std::vector<int> controls = {},
                  std::string label = {});
  Circuit& append(const Circuit& other);

  void apply(StateVector& state) const;
  Circuit adjoint() const;

  /// Dense unitary of the whole circuit (small circuits only).
  Matrix to_matrix() const;

  int num_qubits() const { return num_qubits_; }
  const std::vector<GateOp>& ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }

 private:
  int num_qubits_ = 0;
  std::vector<GateOp> ops_;
};

namespace gates {
Matrix hadamard();
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix phase_s();
Matrix phase_s_dagger();
Matrix phase(double angle);  // diag(1, e^{i angle})
Matrix swap();
}  // namespace gates

/// Textbook QFT, |a> -> 2^{-n/2} sum_b e^{2 pi i a b / 2^n} |b>, on a register.
Circuit qft_circuit(const QubitRegister& reg, int num_qubits);

/// Inverse QFT over G_n: |x> -> 2^{-n/2} sum_{k in G_n} e^{-2 pi i 2^n x k} |k>.
Circuit grid_qft_inverse_circuit(const QubitRegister& reg, int num_qubits);

void apply_qft_inverse(StateVector& state, std::string_view register_name);
void apply_qft(StateVector& state, std::string_view register_name);

struct RegisterOutcome {
  std::string name;
  std::uint64_t label = 0;
  double value = 0.0;  // G_n decoding of the label
};

struct MeasurementOutcome {
  std::uint64_t basis_index = 0;
  std::vector<RegisterOutcome> registers;
};

MeasurementOutcome decode_outcome(const RegisterLayout& layout, std::uint64_t basis_index);

/// One computational-basis measurement of every qubit.
MeasurementOutcome measure_all(const StateVector& state, RngStream& rng);

/// Repeated sampling from a fixed state; cumulative table built once.
class Sampler {
 public:
  explicit Sampler(const StateVector& state);
  MeasurementOutcome sample(RngStream& rng) const;
  std::uint64_t sample_index(RngStream& rng) const;
  const RegisterLayout& layout() const { return layout_; }

 private:
  RegisterLayout layout_;
  std::vector<double> cumulative_;
};

}  // namespace gradeval
