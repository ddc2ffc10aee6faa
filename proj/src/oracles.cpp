#include "gradeval/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gradeval {

namespace {

std::vector<int> register_qubits(const QubitRegister& reg) {
  std::vector<int> q(static_cast<std::size_t>(reg.width));
  std::iota(q.begin(), q.end(), reg.offset);
  return q;
}

std::uint64_t grid_size(std::span<const int> widths) {
  int total = 0;
  for (int n : widths) {
    if (n < 1) throw std::invalid_argument("index register widths must be >= 1");
    total += n;
  }
  if (total > 30) throw std::invalid_argument("index grid too large for a dense table");
  return std::uint64_t{1} << total;
}

void check_x(const ParameterizedUnitary& u, std::span<const double> x) {
  if (x.size() != u.dimension()) {
    throw std::invalid_argument("parameter vector has length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(u.dimension()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("parameter vector must be finite");
  }
}

// Largest-remainder split of `total` in proportion to `weights`.
std::vector<std::uint64_t> apportion(std::uint64_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::uint64_t> out(weights.size(), 0);
  if (sum <= 0.0 || total == 0) return out;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    out[i] = static_cast<std::uint64_t>(std::floor(exact));
    assigned += out[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned) {
    ++out[remainders[i].second];
  }
  return out;
}

void charge_u_psi(ResourceLedger& ledger, std::uint64_t calls) {
  // Realizing fractional queries alternates forward and inverse state preparation.
  ledger.u_psi_forward += (calls + 1) / 2;
  ledger.u_psi_inverse += calls / 2;
}

}  // namespace

// ---------------------------------------------------------------------------

StatePrepOracle::StatePrepOracle(Matrix unitary) : unitary_(std::move(unitary)) {
  require_unitary(unitary_);
  const auto dim = static_cast<std::uint64_t>(unitary_.rows());
  if (dim < 2 || std::popcount(dim) != 1) throw std::invalid_argument("state preparation must act on qubits");
  num_qubits_ = std::countr_zero(dim);
  state_ = unitary_.col(0);
}

StatePrepOracle StatePrepOracle::from_state(const Vector& psi) {
  const double norm = psi.norm();
  if (std::abs(norm * norm - 1.0) > 1e-10) throw std::invalid_argument("target state is not normalized");
  const Eigen::Index dim = psi.size();
  const double phase = std::arg(psi[0]);
  const Complex unit = std::polar(1.0, phase);
  // Householder reflection sending e^{i phase} e_0 to psi.
  Vector w = psi;
  w[0] -= unit;
  const double wn = w.squaredNorm();
  Matrix u = Matrix::Identity(dim, dim);
  if (wn > 1e-28) u -= (2.0 / wn) * w * w.adjoint();
  u *= unit;
  return StatePrepOracle(std::move(u));
}

// ---------------------------------------------------------------------------

ResourceLedger::ResourceLedger(std::size_t observables)
    : controlled_evolution_count(observables, 0),
      offset_evolution_count(observables, 0),
      total_evolution_duration(observables, 0.0) {}

void ResourceLedger::note_qubits(int qubits) { qubit_high_water = std::max(qubit_high_water, qubits); }

void ResourceLedger::merge(const ResourceLedger& other) {
  const auto grow = [](auto& v, std::size_t n) {
    if (v.size() < n) v.resize(n, 0);
  };
  grow(controlled_evolution_count, other.controlled_evolution_count.size());
  grow(offset_evolution_count, other.offset_evolution_count.size());
  grow(total_evolution_duration, other.total_evolution_duration.size());
  u_psi_forward += other.u_psi_forward;
  u_psi_inverse += other.u_psi_inverse;
  unit_phase_queries += other.unit_phase_queries;
  phase_oracle_queries += other.phase_oracle_queries;
  for (std::size_t j = 0; j < other.controlled_evolution_count.size(); ++j) {
    controlled_evolution_count[j] += other.controlled_evolution_count[j];
  }
  for (std::size_t j = 0; j < other.offset_evolution_count.size(); ++j) {
    offset_evolution_count[j] += other.offset_evolution_count[j];
  }
  for (std::size_t j = 0; j < other.total_evolution_duration.size(); ++j) {
    total_evolution_duration[j] += other.total_evolution_duration[j];
  }
  note_qubits(other.qubit_high_water);
}

void OracleSettings::validate() const {
  if (!(phase_error >= 0.0) || !(phase_error < 1.0 / 3.0)) {
    throw std::invalid_argument("phase error must lie in [0, 1/3), got " + std::to_string(phase_error));
  }
}

void OracleCharge::apply_to(ResourceLedger& ledger, std::uint64_t times) const {
  const std::size_t M = controlled_evolutions.size();
  if (ledger.controlled_evolution_count.size() < M) {
    ledger.controlled_evolution_count.resize(M, 0);
    ledger.offset_evolution_count.resize(M, 0);
    ledger.total_evolution_duration.resize(M, 0.0);
  }
  for (std::size_t j = 0; j < M; ++j) {
    ledger.controlled_evolution_count[j] += times * controlled_evolutions[j];
    ledger.offset_evolution_count[j] += times * offset_evolutions[j];
    ledger.total_evolution_duration[j] += static_cast<double>(times) * evolution_duration[j];
  }
}

// ---------------------------------------------------------------------------

ParameterizedUnitary::ParameterizedUnitary(std::vector<HermitianOperator> generators,
                                           std::vector<std::optional<Matrix>> fixed)
    : generators_(std::move(generators)), fixed_(std::move(fixed)) {
  if (generators_.empty()) throw std::invalid_argument("parameterized unitary needs M >= 1 generators");
  if (fixed_.empty()) fixed_.resize(generators_.size() + 1);
  if (fixed_.size() != generators_.size() + 1) {
    throw std::invalid_argument("expected M + 1 fixed unitaries");
  }
  num_qubits_ = generators_.front().num_qubits();
  const auto dim = Eigen::Index{1} << num_qubits_;
  for (const auto& g : generators_) {
    if (g.num_qubits() != num_qubits_) throw std::invalid_argument("generators act on different widths");
  }
  for (const auto& w : fixed_) {
    if (!w) continue;
    if (w->rows() != dim || w->cols() != dim) throw std::invalid_argument("fixed unitary has the wrong dimension");
    require_unitary(*w);
  }
}

ParameterizedUnitary ParameterizedUnitary::product_of_exponentials(const ObservableSet& observables) {
  std::vector<HermitianOperator> gens;
  gens.reserve(observables.size());
  for (const auto& o : observables) gens.push_back(o.body());
  return ParameterizedUnitary(std::move(gens), std::vector<std::optional<Matrix>>(observables.size() + 1));
}

Matrix ParameterizedUnitary::evaluate(std::span<const double> x) const {
  check_x(*this, x);
  const auto dim = Eigen::Index{1} << num_qubits_;
  Matrix u = fixed_[0] ? *fixed_[0] : Matrix::Identity(dim, dim);
  for (std::size_t j = 0; j < generators_.size(); ++j) {
    u = u * generators_[j].exponential(2.0 * x[j]);
    if (fixed_[j + 1]) u = u * *fixed_[j + 1];
  }
  return u;
}

void ParameterizedUnitary::apply(std::span<const double> x, Vector& v) const {
  check_x(*this, x);
  for (std::size_t j = generators_.size(); j-- > 0;) {
    if (fixed_[j + 1]) v = *fixed_[j + 1] * v;
    generators_[j].apply_exponential(2.0 * x[j], v);
  }
  if (fixed_[0]) v = *fixed_[0] * v;
}

Matrix build_U_of_x(const ObservableSet& observables, std::span<const double> x) {
  return ParameterizedUnitary::product_of_exponentials(observables).evaluate(x);
}

// ---------------------------------------------------------------------------

HadamardTestFunction::HadamardTestFunction(ParameterizedUnitary unitary, StatePrepOracle psi,
                                           HadamardVariant variant)
    : unitary_(std::move(unitary)), psi_(std::move(psi)), variant_(variant) {
  if (unitary_.num_qubits() != psi_.num_qubits()) {
    throw std::invalid_argument("state preparation and observables act on different widths");
  }
}

double HadamardTestFunction::operator()(std::span<const double> x) const {
  Vector v = psi_.state();
  unitary_.apply(x, v);
  const Complex overlap = psi_.state().dot(v);
  return variant_ == HadamardVariant::imaginary ? 0.5 - 0.5 * overlap.imag() : 0.5 - 0.5 * overlap.real();
}

std::vector<double> HadamardTestFunction::evaluate_on_grid(double scale, std::span<const int> widths) const {
  const std::size_t M = unitary_.dimension();
  if (widths.size() != M) throw std::invalid_argument("one grid width per parameter required");
  const std::uint64_t total = grid_size(widths);

  // Per-register exponentials for every grid label; the full product is then
  // assembled right to left with shared suffixes.
  std::vector<std::vector<Matrix>> factors(M);
  std::vector<std::uint64_t> stride(M, 1);
  for (std::size_t j = 0; j < M; ++j) {
    const std::uint64_t size = std::uint64_t{1} << widths[j];
    if (j > 0) stride[j] = stride[j - 1] << widths[j - 1];
    factors[j].reserve(size);
    for (std::uint64_t k = 0; k < size; ++k) {
      Matrix e = unitary_.generator(j).exponential(2.0 * scale * grid_value(k, widths[j]));
      if (unitary_.fixed(j + 1)) e = e * *unitary_.fixed(j + 1);
      factors[j].push_back(std::move(e));
    }
  }
  const Vector& psi = psi_.state();
  const Vector bra = unitary_.fixed(0) ? Vector(unitary_.fixed(0)->adjoint() * psi) : psi;
  const bool imaginary = variant_ == HadamardVariant::imaginary;

  std::vector<double> out(total);
  std::vector<Vector> partial(M + 1);
  partial[M] = psi;
  auto recurse = [&](auto&& self, std::size_t j, std::uint64_t base) -> void {
    const auto& fs = factors[j];
    for (std::uint64_t k = 0; k < fs.size(); ++k) {
      const std::uint64_t index = base + k * stride[j];
      if (j == 0) {
        const Complex overlap = bra.dot(fs[k] * partial[1]);
        out[index] = imaginary ? 0.5 - 0.5 * overlap.imag() : 0.5 - 0.5 * overlap.real();
      } else {
        partial[j].noalias() = fs[k] * partial[j + 1];
        self(self, j - 1, index);
      }
    }
  };
  recurse(recurse, M - 1, 0);
  return out;
}

double f_analytic(const ObservableSet& observables, const StatePrepOracle& psi, std::span<const double> x,
                  ResourceLedger* ledger) {
  const HadamardTestFunction f(ParameterizedUnitary::product_of_exponentials(observables), psi);
  const double value = f(x);
  if (ledger != nullptr) {
    ledger->u_psi_forward += 1;
    ledger->note_qubits(observables.num_qubits() + 1);
  }
  return value;
}

// ---------------------------------------------------------------------------

namespace {

void append_hadamard_prologue(Circuit& c, const StatePrepOracle& psi, int ancilla, const std::vector<int>& system,
                              HadamardVariant variant) {
  c.append(psi.unitary(), system, {}, "U_psi");
  c.append(gates::hadamard(), {ancilla}, {}, "H");
  if (variant == HadamardVariant::imaginary) c.append(gates::phase_s_dagger(), {ancilla}, {}, "Sdg");
}

}  // namespace

OracleCircuit build_F(const ParameterizedUnitary& unitary, const StatePrepOracle& psi, std::span<const double> x,
                      HadamardVariant variant) {
  check_x(unitary, x);
  if (unitary.num_qubits() != psi.num_qubits()) throw std::invalid_argument("width mismatch in build_F");
  const std::size_t M = unitary.dimension();
  OracleCircuit out;
  out.layout.add("ancilla", 1).add("system", unitary.num_qubits());
  out.circuit = Circuit(out.layout.total_width());
  const int ancilla = out.layout.at("ancilla").qubit(0);
  const auto system = register_qubits(out.layout.at("system"));

  append_hadamard_prologue(out.circuit, psi, ancilla, system, variant);
  // Rightmost factor acts first.
  for (std::size_t j = M + 1; j-- > 0;) {
    if (unitary.fixed(j)) out.circuit.append(*unitary.fixed(j), system, {ancilla}, "c-W");
    if (j == 0) break;
    out.circuit.append(unitary.generator(j - 1).exponential(2.0 * x[j - 1]), system, {ancilla}, "c-exp");
  }
  out.circuit.append(gates::hadamard(), {ancilla}, {}, "H");

  out.charge.controlled_evolutions.assign(M, 1);
  out.charge.offset_evolutions.assign(M, 0);
  out.charge.evolution_duration.resize(M);
  for (std::size_t j = 0; j < M; ++j) out.charge.evolution_duration[j] = 2.0 * std::abs(x[j]);
  return out;
}

OracleCircuit build_F(const ObservableSet& observables, const StatePrepOracle& psi, std::span<const double> x) {
  return build_F(ParameterizedUnitary::product_of_exponentials(observables), psi, x);
}

OracleCharge probability_oracle_charge(std::span<const int> widths, double scale) {
  OracleCharge charge;
  const std::size_t M = widths.size();
  charge.controlled_evolutions.resize(M);
  charge.offset_evolutions.assign(M, 1);
  charge.evolution_duration.resize(M);
  for (std::size_t j = 0; j < M; ++j) {
    const double size = static_cast<double>(std::uint64_t{1} << widths[j]);
    charge.controlled_evolutions[j] = static_cast<std::uint64_t>(widths[j]);
    // sum_b 2|s| 2^b / N plus the offset 2|s| (1/2 - 1/(2N)).
    charge.evolution_duration[j] = 3.0 * std::abs(scale) * (1.0 - 1.0 / size);
  }
  return charge;
}

OracleCircuit build_probability_oracle(const ParameterizedUnitary& unitary, const StatePrepOracle& psi,
                                       std::span<const int> widths, double scale, HadamardVariant variant) {
  const std::size_t M = unitary.dimension();
  if (widths.size() != M) throw std::invalid_argument("one index register per parameter required");
  if (!std::isfinite(scale)) throw std::invalid_argument("oracle scale must be finite");
  if (unitary.num_qubits() != psi.num_qubits()) throw std::invalid_argument("width mismatch in probability oracle");
  OracleCircuit out;
  for (std::size_t j = 0; j < M; ++j) out.layout.add("x" + std::to_string(j + 1), widths[j]);
  out.layout.add("ancilla", 1).add("system", unitary.num_qubits());
  out.circuit = Circuit(out.layout.total_width());
  const int ancilla = out.layout.at("ancilla").qubit(0);
  const auto system = register_qubits(out.layout.at("system"));

  append_hadamard_prologue(out.circuit, psi, ancilla, system, variant);
  for (std::size_t j = M + 1; j-- > 0;) {
    if (unitary.fixed(j)) out.circuit.append(*unitary.fixed(j), system, {ancilla}, "c-W");
    if (j == 0) break;
    const auto& reg = out.layout.registers()[j - 1];
    const auto& gen = unitary.generator(j - 1);
    const double size = static_cast<double>(std::uint64_t{1} << reg.width);
    for (int b = 0; b < reg.width; ++b) {
      const double theta = 2.0 * scale * static_cast<double>(std::uint64_t{1} << b) / size;
      out.circuit.append(gen.exponential(theta), system, {ancilla, reg.qubit(b)}, "cc-exp");
    }
    const double offset = 2.0 * scale * (-0.5 + 0.5 / size);
    out.circuit.append(gen.exponential(offset), system, {ancilla}, "c-exp-offset");
  }
  out.circuit.append(gates::hadamard(), {ancilla}, {}, "H");
  out.charge = probability_oracle_charge(widths, scale);
  return out;
}

OracleCircuit build_probability_oracle(const ObservableSet& observables, const StatePrepOracle& psi,
                                       const GradientPlan& plan, int l) {
  if (l < -plan.m || l > plan.m) {
    throw std::out_of_range("scale index " + std::to_string(l) + " outside {-" + std::to_string(plan.m) + ".." +
                            std::to_string(plan.m) + "}");
  }
  return build_probability_oracle(ParameterizedUnitary::product_of_exponentials(observables), psi, plan.n,
                                  static_cast<double>(l) * plan.r);
}

void apply_oracle(const OracleCircuit& oracle, StateVector& state, ResourceLedger& ledger) {
  oracle.circuit.apply(state);
  ledger.u_psi_forward += 1;
  oracle.charge.apply_to(ledger);
  ledger.note_qubits(state.num_qubits());
}

void apply_oracle_inverse(const OracleCircuit& oracle, StateVector& state, ResourceLedger& ledger) {
  oracle.circuit.adjoint().apply(state);
  ledger.u_psi_inverse += 1;
  oracle.charge.apply_to(ledger);
  ledger.note_qubits(state.num_qubits());
}

double flag_probability(const StateVector& state, std::string_view register_name) {
  const auto& reg = state.layout().at(register_name);
  if (reg.width != 1) throw std::invalid_argument("flag register must be a single qubit");
  const std::uint64_t bit = std::uint64_t{1} << reg.offset;
  const auto& amps = state.amplitudes();
  double p = 0.0;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    if (static_cast<std::uint64_t>(i) & bit) p += std::norm(amps[i]);
  }
  return p;
}

std::vector<double> extract_f_from_circuit(const HadamardTestFunction& function, std::span<const int> widths,
                                           double scale) {
  const auto oracle =
      build_probability_oracle(function.unitary(), function.psi(), widths, scale, function.variant());
  const std::uint64_t total = grid_size(widths);
  StateVector state(oracle.layout);
  for (std::size_t j = 0; j < widths.size(); ++j) {
    const auto& reg = oracle.layout.registers()[j];
    for (int b = 0; b < reg.width; ++b) apply_gate(state, gates::hadamard(), std::vector<int>{reg.qubit(b)});
  }
  oracle.circuit.apply(state);
  // Index registers are the low bits, so the grid index is the low part of the basis index.
  const std::uint64_t index_mask = total - 1;
  const std::uint64_t flag = std::uint64_t{1} << oracle.layout.at("ancilla").offset;
  std::vector<double> f(total, 0.0);
  const auto& amps = state.amplitudes();
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    if (u & flag) f[u & index_mask] += std::norm(amps[i]);
  }
  for (double& v : f) v *= static_cast<double>(total);
  return f;
}

// ---------------------------------------------------------------------------

SyntheticPhaseOracle::SyntheticPhaseOracle(std::vector<int> widths,
                                           const std::function<double(std::span<const double>)>& h,
                                           double phase_error)
    : widths_(std::move(widths)), phase_error_(phase_error) {
  OracleSettings{OracleMode::analytic, phase_error_}.validate();
  const std::uint64_t total = grid_size(widths_);
  table_.resize(total);
  std::vector<double> x(widths_.size());
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rest = idx;
    for (std::size_t j = 0; j < widths_.size(); ++j) {
      x[j] = grid_value(rest & ((std::uint64_t{1} << widths_[j]) - 1), widths_[j]);
      rest >>= widths_[j];
    }
    table_[idx] = h(x);
  }
}

void SyntheticPhaseOracle::charge(double power, ResourceLedger& ledger) const {
  const auto units = static_cast<std::uint64_t>(std::ceil(std::abs(power) / (2.0 * kPi) - 1e-12));
  ledger.unit_phase_queries += units;
  ledger.phase_oracle_queries += units;
  charge_u_psi(ledger, units);
}

GradientPhaseOracle::GradientPhaseOracle(std::shared_ptr<const HadamardTestFunction> function,
                                         const GradientPlan& plan, OracleSettings settings)
    : plan_(plan), settings_(settings), widths_(plan.n) {
  settings_.validate();
  if (!function) throw std::invalid_argument("null objective");
  if (function->dimension() != plan.M) throw std::invalid_argument("objective dimension differs from plan M");
  table_.assign(grid_size(widths_), 0.0);
  for (int l = -plan_.m; l <= plan_.m; ++l) {
    const double a = plan_.coefficient(l);
    if (a == 0.0) continue;
    const double scale = static_cast<double>(l) * plan_.r;
    const auto f = settings_.mode == OracleMode::circuit ? extract_f_from_circuit(*function, widths_, scale)
                                                         : function->evaluate_on_grid(scale, widths_);
    for (std::size_t k = 0; k < table_.size(); ++k) table_[k] += a * f[k];
  }
  build_charges();
}

GradientPhaseOracle::GradientPhaseOracle(std::function<double(std::span<const double>)> f, const GradientPlan& plan,
                                         double phase_error)
    : plan_(plan), settings_{OracleMode::analytic, phase_error}, widths_(plan.n) {
  settings_.validate();
  const std::uint64_t total = grid_size(widths_);
  table_.assign(total, 0.0);
  std::vector<double> x(widths_.size());
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::vector<double> k(widths_.size());
    std::uint64_t rest = idx;
    for (std::size_t j = 0; j < widths_.size(); ++j) {
      k[j] = grid_value(rest & ((std::uint64_t{1} << widths_[j]) - 1), widths_[j]);
      rest >>= widths_[j];
    }
    double h = 0.0;
    for (int l = -plan_.m; l <= plan_.m; ++l) {
      const double a = plan_.coefficient(l);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < k.size(); ++j) x[j] = static_cast<double>(l) * plan_.r * k[j];
      h += a * f(x);
    }
    table_[idx] = h;
  }
  build_charges();
}

void GradientPhaseOracle::build_charges() {
  per_scale_charge_.clear();
  for (int l = -plan_.m; l <= plan_.m; ++l) {
    per_scale_charge_.push_back(probability_oracle_charge(widths_, static_cast<double>(l) * plan_.r));
  }
}

void GradientPhaseOracle::charge(double power, ResourceLedger& ledger) const {
  const double l1 = plan_.coefficient_l1();
  const auto units = static_cast<std::uint64_t>(std::ceil(std::abs(power) * l1 / (2.0 * kPi) - 1e-9));
  const auto multiplier = static_cast<std::uint64_t>(std::max(1, plan_.conversion_multiplier));
  const std::uint64_t calls = units * multiplier;
  ledger.unit_phase_queries += units;
  ledger.phase_oracle_queries += calls;
  charge_u_psi(ledger, calls);

  std::vector<double> weights;
  for (int l = -plan_.m; l <= plan_.m; ++l) weights.push_back(std::abs(plan_.coefficient(l)));
  const auto split = apportion(calls, weights);
  for (std::size_t i = 0; i < split.size(); ++i) per_scale_charge_[i].apply_to(ledger, split[i]);
}

void apply_phase_oracle(StateVector& index_state, const PhaseOracle& oracle, double power, ResourceLedger& ledger,
                        RngStream* perturbation) {
  const auto& table = oracle.phase_table();
  if (index_state.dimension() != table.size()) {
    throw std::invalid_argument("index state does not match the phase oracle grid");
  }
  const double eps = oracle.phase_error();
  OracleSettings{OracleMode::analytic, eps}.validate();
  auto& amps = index_state.amplitudes();
  for (std::size_t k = 0; k < table.size(); ++k) {
    double phase = power * table[k];
    if (eps > 0.0 && perturbation != nullptr) phase += eps * (2.0 * perturbation->uniform() - 1.0);
    amps[static_cast<Eigen::Index>(k)] *= std::polar(1.0, phase);
  }
  oracle.charge(power, ledger);
  ledger.note_qubits(index_state.num_qubits());
}

}  // namespace gradeval
