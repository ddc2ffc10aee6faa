#include "gradeval/simcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace gradeval {

namespace {

constexpr double kNormTolerance = 1e-10;
constexpr double kMeasureNormTolerance = 1e-8;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = stream ^ 0xd1b54a32d192ed03ULL;
  std::uint64_t b = splitmix64(t);
  std::uint64_t k = a ^ (b + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2));
  return splitmix64(k);
}

// Spreads the bits of `compressed` over the positions not listed in `sorted_zero_bits`.
std::uint64_t insert_zero_bits(std::uint64_t compressed, std::span<const int> sorted_zero_bits) {
  std::uint64_t x = compressed;
  for (int bit : sorted_zero_bits) {
    const std::uint64_t low = x & ((std::uint64_t{1} << bit) - 1);
    x = ((x >> bit) << (bit + 1)) | low;
  }
  return x;
}

void validate_qubits(int num_qubits, std::span<const int> targets, std::span<const int> controls) {
  if (targets.empty()) throw std::invalid_argument("gate needs at least one target qubit");
  std::vector<int> all(targets.begin(), targets.end());
  all.insert(all.end(), controls.begin(), controls.end());
  for (int q : all) {
    if (q < 0 || q >= num_qubits) {
      throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range for " +
                                  std::to_string(num_qubits) + " qubits");
    }
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::invalid_argument("overlapping qubit indices in gate targets/controls");
  }
}

void validate_dimension(const Matrix& gate, std::size_t num_targets) {
  const auto expected = static_cast<Eigen::Index>(std::uint64_t{1} << num_targets);
  if (gate.rows() != expected || gate.cols() != expected) {
    throw std::invalid_argument("gate dimension " + std::to_string(gate.rows()) + "x" +
                                std::to_string(gate.cols()) + " does not match " +
                                std::to_string(num_targets) + " target qubits");
  }
}

void apply_single(Vector& amps, const Matrix& g, int target, std::uint64_t cmask) {
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  const std::uint64_t half = dim >> 1;
  const std::uint64_t tbit = std::uint64_t{1} << target;
  const Complex g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
  const bool diagonal = g01 == Complex{} && g10 == Complex{};
  const std::uint64_t lowmask = tbit - 1;
  for (std::uint64_t c = 0; c < half; ++c) {
    const std::uint64_t i0 = ((c & ~lowmask) << 1) | (c & lowmask);
    if ((i0 & cmask) != cmask) continue;
    const std::uint64_t i1 = i0 | tbit;
    const Complex a0 = amps[static_cast<Eigen::Index>(i0)];
    const Complex a1 = amps[static_cast<Eigen::Index>(i1)];
    if (diagonal) {
      amps[static_cast<Eigen::Index>(i0)] = g00 * a0;
      amps[static_cast<Eigen::Index>(i1)] = g11 * a1;
    } else {
      amps[static_cast<Eigen::Index>(i0)] = g00 * a0 + g01 * a1;
      amps[static_cast<Eigen::Index>(i1)] = g10 * a0 + g11 * a1;
    }
  }
}

void apply_unchecked(Vector& amps, const Matrix& gate, std::span<const int> targets,
                     std::span<const int> controls) {
  std::uint64_t cmask = 0;
  for (int q : controls) cmask |= std::uint64_t{1} << q;
  if (targets.size() == 1) {
    apply_single(amps, gate, targets[0], cmask);
    return;
  }
  const std::size_t k = targets.size();
  const std::uint64_t local_dim = std::uint64_t{1} << k;
  std::vector<std::uint64_t> offsets(local_dim, 0);
  for (std::uint64_t l = 0; l < local_dim; ++l) {
    for (std::size_t t = 0; t < k; ++t) {
      if ((l >> t) & 1U) offsets[l] |= std::uint64_t{1} << targets[t];
    }
  }
  std::vector<int> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end());
  const std::uint64_t outer = static_cast<std::uint64_t>(amps.size()) >> k;
  Vector local(static_cast<Eigen::Index>(local_dim));
  Vector result(static_cast<Eigen::Index>(local_dim));
  for (std::uint64_t c = 0; c < outer; ++c) {
    const std::uint64_t base = insert_zero_bits(c, sorted);
    if ((base & cmask) != cmask) continue;
    for (std::uint64_t l = 0; l < local_dim; ++l) {
      local[static_cast<Eigen::Index>(l)] = amps[static_cast<Eigen::Index>(base | offsets[l])];
    }
    result.noalias() = gate * local;
    for (std::uint64_t l = 0; l < local_dim; ++l) {
      amps[static_cast<Eigen::Index>(base | offsets[l])] = result[static_cast<Eigen::Index>(l)];
    }
  }
}

}  // namespace

std::uint64_t grid_label(double value, int width) {
  const double size = static_cast<double>(std::uint64_t{1} << width);
  const double j = std::round((value + 0.5 - 0.5 / size) * size);
  return static_cast<std::uint64_t>(std::clamp(j, 0.0, size - 1.0));
}

// ---------------------------------------------------------------------------

RegisterLayout& RegisterLayout::add(std::string name, int width) {
  if (width < 1) throw std::invalid_argument("register '" + name + "' must have width >= 1");
  if (find(name) != nullptr) throw std::invalid_argument("duplicate register name '" + name + "'");
  registers_.push_back(QubitRegister{std::move(name), width, total_width_});
  total_width_ += width;
  return *this;
}

const QubitRegister* RegisterLayout::find(std::string_view name) const {
  for (const auto& reg : registers_) {
    if (reg.name == name) return &reg;
  }
  return nullptr;
}

const QubitRegister& RegisterLayout::at(std::string_view name) const {
  const auto* reg = find(name);
  if (reg == nullptr) throw std::out_of_range("register '" + std::string(name) + "' not found");
  return *reg;
}

std::uint64_t RegisterLayout::compose(std::span<const std::uint64_t> labels) const {
  if (labels.size() != registers_.size()) {
    throw std::invalid_argument("expected one label per register");
  }
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& reg = registers_[i];
    if (labels[i] >> reg.width) throw std::invalid_argument("label too large for register " + reg.name);
    index |= labels[i] << reg.offset;
  }
  return index;
}

// ---------------------------------------------------------------------------

StateVector::StateVector(RegisterLayout layout) : layout_(std::move(layout)) {
  if (layout_.total_width() < 1) throw std::invalid_argument("state needs at least one qubit");
  if (layout_.total_width() > 30) throw std::invalid_argument("dense state limited to 30 qubits");
  amplitudes_ = Vector::Zero(static_cast<Eigen::Index>(std::uint64_t{1} << layout_.total_width()));
  amplitudes_[0] = 1.0;
}

StateVector::StateVector(RegisterLayout layout, Vector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  const auto expected = std::uint64_t{1} << layout_.total_width();
  if (static_cast<std::uint64_t>(amplitudes_.size()) != expected) {
    throw std::invalid_argument("amplitude count does not match layout width");
  }
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("state amplitudes are not normalized");
  }
}

void StateVector::set_basis_state(std::uint64_t basis_index) {
  if (basis_index >= dimension()) throw std::out_of_range("basis index out of range");
  amplitudes_.setZero();
  amplitudes_[static_cast<Eigen::Index>(basis_index)] = 1.0;
}

// ---------------------------------------------------------------------------

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), state_(mix_key(seed, stream)) {}

RngStream::result_type RngStream::operator()() { return splitmix64(state_); }

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(mix_key(seed_, stream_), id);
}

// ---------------------------------------------------------------------------

void require_unitary(const Matrix& gate, double tolerance) {
  if (gate.rows() != gate.cols()) throw std::invalid_argument("gate is not square");
  const Matrix product = gate.adjoint() * gate;
  const double deviation =
      (product - Matrix::Identity(gate.rows(), gate.cols())).cwiseAbs().maxCoeff();
  if (!(deviation <= tolerance)) {
    throw std::invalid_argument("gate is not unitary (deviation " + std::to_string(deviation) + ")");
  }
}

void apply_gate(StateVector& state, const Matrix& gate, std::span<const int> targets,
                std::span<const int> controls) {
  validate_qubits(state.num_qubits(), targets, controls);
  validate_dimension(gate, targets.size());
  require_unitary(gate);
  apply_unchecked(state.amplitudes(), gate, targets, controls);
}

Circuit& Circuit::append(Matrix gate, std::vector<int> targets, std::vector<int> controls,
                         std::string label) {
  validate_qubits(num_qubits_, targets, controls);
  validate_dimension(gate, targets.size());
  require_unitary(gate);
  ops_.push_back(GateOp{std::move(gate), std::move(targets), std::move(controls), std::move(label)});
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  if (other.num_qubits_ > num_qubits_) throw std::invalid_argument("appended circuit is wider");
  ops_.insert(ops_.end(), other.ops_.begin(), other.ops_.end());
  return *this;
}

void Circuit::apply(StateVector& state) const {
  if (state.num_qubits() < num_qubits_) throw std::invalid_argument("state narrower than circuit");
  for (const auto& op : ops_) apply_unchecked(state.amplitudes(), op.unitary, op.targets, op.controls);
}

Circuit Circuit::adjoint() const {
  Circuit out(num_qubits_);
  out.ops_.reserve(ops_.size());
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    out.ops_.push_back(GateOp{it->unitary.adjoint(), it->targets, it->controls, it->label + "^dag"});
  }
  return out;
}

Matrix Circuit::to_matrix() const {
  if (num_qubits_ > 12) throw std::invalid_argument("circuit too wide for a dense matrix");
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << num_qubits_);
  Matrix result(dim, dim);
  RegisterLayout layout;
  layout.add("q", num_qubits_);
  StateVector column(layout);
  for (Eigen::Index j = 0; j < dim; ++j) {
    column.set_basis_state(static_cast<std::uint64_t>(j));
    apply(column);
    result.col(j) = column.amplitudes();
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace gates {

Matrix hadamard() {
  Matrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix phase_s() { return phase(kPi / 2); }
Matrix phase_s_dagger() { return phase(-kPi / 2); }

Matrix phase(double angle) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = std::polar(1.0, angle);
  return m;
}

Matrix swap() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = 1;
  m(1, 2) = m(2, 1) = 1;
  return m;
}

}  // namespace gates

Circuit qft_circuit(const QubitRegister& reg, int num_qubits) {
  Circuit c(num_qubits);
  const int n = reg.width;
  for (int q = n - 1; q >= 0; --q) {
    c.append(gates::hadamard(), {reg.qubit(q)}, {}, "H");
    for (int p = q - 1; p >= 0; --p) {
      const double angle = 2.0 * kPi / static_cast<double>(std::uint64_t{1} << (q - p + 1));
      c.append(gates::phase(angle), {reg.qubit(q)}, {reg.qubit(p)}, "CP");
    }
  }
  for (int i = 0; i < n / 2; ++i) {
    c.append(gates::swap(), {reg.qubit(i), reg.qubit(n - 1 - i)}, {}, "SWAP");
  }
  return c;
}

// With x = (a + s)/N and k = (b + s)/N, s = 1/2 - N/2, the kernel factors as
// e^{-2 pi i (ab + s a + s b + s^2)/N}: an input diagonal, the inverse DFT, an
// output diagonal and a global phase. Both diagonals are products of
// single-qubit phases because s a / N is linear in the bits of a.
Circuit grid_qft_inverse_circuit(const QubitRegister& reg, int num_qubits) {
  const int n = reg.width;
  const double size = static_cast<double>(std::uint64_t{1} << n);
  const double shift = 0.5 - size / 2.0;
  Circuit diag(num_qubits);
  for (int b = 0; b < n; ++b) {
    const double angle = -2.0 * kPi * shift * static_cast<double>(std::uint64_t{1} << b) / size;
    diag.append(gates::phase(angle), {reg.qubit(b)}, {}, "grid-phase");
  }
  Circuit c(num_qubits);
  c.append(diag);
  c.append(qft_circuit(reg, num_qubits).adjoint());
  c.append(diag);
  const Complex global = std::polar(1.0, -2.0 * kPi * shift * shift / size);
  c.append(Matrix::Identity(2, 2) * global, {reg.qubit(0)}, {}, "global-phase");
  return c;
}

void apply_qft_inverse(StateVector& state, std::string_view register_name) {
  const auto& reg = state.layout().at(register_name);
  grid_qft_inverse_circuit(reg, state.num_qubits()).apply(state);
}

void apply_qft(StateVector& state, std::string_view register_name) {
  const auto& reg = state.layout().at(register_name);
  grid_qft_inverse_circuit(reg, state.num_qubits()).adjoint().apply(state);
}

// ---------------------------------------------------------------------------

MeasurementOutcome decode_outcome(const RegisterLayout& layout, std::uint64_t basis_index) {
  MeasurementOutcome out;
  out.basis_index = basis_index;
  out.registers.reserve(layout.registers().size());
  for (const auto& reg : layout.registers()) {
    const auto label = reg.label_of(basis_index);
    out.registers.push_back(RegisterOutcome{reg.name, label, grid_value(label, reg.width)});
  }
  return out;
}

MeasurementOutcome measure_all(const StateVector& state, RngStream& rng) {
  return Sampler(state).sample(rng);
}

Sampler::Sampler(const StateVector& state) : layout_(state.layout()) {
  const double norm = state.norm_squared();
  if (std::abs(norm - 1.0) > kMeasureNormTolerance) {
    throw std::runtime_error("measurement on a state with norm^2 " + std::to_string(norm));
  }
  cumulative_.resize(state.dimension());
  double total = 0.0;
  const auto& amps = state.amplitudes();
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    total += std::norm(amps[static_cast<Eigen::Index>(i)]);
    cumulative_[i] = total;
  }
}

std::uint64_t Sampler::sample_index(RngStream& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::uint64_t>(it - cumulative_.begin());
}

MeasurementOutcome Sampler::sample(RngStream& rng) const {
  return decode_outcome(layout_, sample_index(rng));
}

}  // namespace gradeval
