#pragma once

// Oracle stack: state preparation, the parameterized unitary U(x), the
// Hadamard-test circuit F(x), the gridded probability oracle U_f, the
// idealized (fractional) phase oracle, and the resource ledger.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gradeval/operators.hpp"
#include "gradeval/plan.hpp"
#include "gradeval/simcore.hpp"

namespace gradeval {

class StatePrepOracle {
 public:
  explicit StatePrepOracle(Matrix unitary);
  /// Any unitary whose first column is `psi` (Householder completion).
  static StatePrepOracle from_state(const Vector& psi);

  const Matrix& unitary() const { return unitary_; }
  int num_qubits() const { return num_qubits_; }
  /// |psi> = U_psi |0...0>.
  const Vector& state() const { return state_; }

 private:
  Matrix unitary_;
  Vector state_;
  int num_qubits_ = 0;
};

struct ResourceLedger {
  std::uint64_t u_psi_forward = 0;
  std::uint64_t u_psi_inverse = 0;
  std::uint64_t unit_phase_queries = 0;    // fractional phase-oracle units
  std::uint64_t phase_oracle_queries = 0;  // probability-oracle calls realizing them
  std::vector<std::uint64_t> controlled_evolution_count;  // index-controlled e^{-ixO_j}
  std::vector<std::uint64_t> offset_evolution_count;      // ancilla-only grid-offset rotations
  std::vector<double> total_evolution_duration;           // sum |x| per observable
  int qubit_high_water = 0;

  explicit ResourceLedger(std::size_t observables = 0);

  std::uint64_t u_psi_queries() const { return u_psi_forward + u_psi_inverse; }
  void note_qubits(int qubits);
  void merge(const ResourceLedger& other);
};

enum class OracleMode { analytic, circuit };

struct OracleSettings {
  OracleMode mode = OracleMode::analytic;
  double phase_error = 0.0;  // injected per-application phase error epsilon'

  /// Throws unless 0 <= phase_error < 1/3.
  void validate() const;
};

/// Which component of <psi|U(x)|psi> the Hadamard test reads out.
/// imaginary: F(x) = (H x I) cU(x) (S^dag H x U_psi), P(1) = 1/2 - Im/2.
/// real:      same without S^dag,                     P(1) = 1/2 - Re/2.
enum class HadamardVariant { imaginary, real };

/// U(x) = W_0 e^{-2i x_1 G_1} W_1 e^{-2i x_2 G_2} ... e^{-2i x_M G_M} W_M,
/// with fixed unitaries W_j (identity when absent).
class ParameterizedUnitary {
 public:
  ParameterizedUnitary(std::vector<HermitianOperator> generators, std::vector<std::optional<Matrix>> fixed);

  /// prod_j e^{-2i x_j O_j} with j = 1 leftmost.
  static ParameterizedUnitary product_of_exponentials(const ObservableSet& observables);

  std::size_t dimension() const { return generators_.size(); }
  int num_qubits() const { return num_qubits_; }
  const HermitianOperator& generator(std::size_t j) const { return generators_[j]; }
  /// W_j for j = 0..M.
  const std::optional<Matrix>& fixed(std::size_t j) const { return fixed_[j]; }

  Matrix evaluate(std::span<const double> x) const;
  /// v <- U(x) v.
  void apply(std::span<const double> x, Vector& v) const;

 private:
  std::vector<HermitianOperator> generators_;
  std::vector<std::optional<Matrix>> fixed_;
  int num_qubits_ = 0;
};

Matrix build_U_of_x(const ObservableSet& observables, std::span<const double> x);

/// Hadamard-test probability of ancilla outcome 1, evaluated from dense algebra.
class HadamardTestFunction {
 public:
  HadamardTestFunction(ParameterizedUnitary unitary, StatePrepOracle psi,
                       HadamardVariant variant = HadamardVariant::imaginary);

  double operator()(std::span<const double> x) const;
  /// f at scale * k for every k of the grid G_{n_1} x ... x G_{n_M}; flattened
  /// with register 1 as the least significant digit.
  std::vector<double> evaluate_on_grid(double scale, std::span<const int> widths) const;

  const ParameterizedUnitary& unitary() const { return unitary_; }
  const StatePrepOracle& psi() const { return psi_; }
  HadamardVariant variant() const { return variant_; }
  std::size_t dimension() const { return unitary_.dimension(); }

 private:
  ParameterizedUnitary unitary_;
  StatePrepOracle psi_;
  HadamardVariant variant_;
};

/// f(x) = -Im<psi|U(x)|psi>/2 + 1/2; charges one U_psi call when a ledger is given.
double f_analytic(const ObservableSet& observables, const StatePrepOracle& psi, std::span<const double> x,
                  ResourceLedger* ledger = nullptr);

/// What one application of an oracle circuit costs.
struct OracleCharge {
  std::vector<std::uint64_t> controlled_evolutions;
  std::vector<std::uint64_t> offset_evolutions;
  std::vector<double> evolution_duration;

  void apply_to(ResourceLedger& ledger, std::uint64_t times = 1) const;
};

/// A circuit that calls U_psi exactly once, with its register layout.
struct OracleCircuit {
  RegisterLayout layout;
  Circuit circuit;
  OracleCharge charge;
};

/// F(x) on layout (ancilla, system).
OracleCircuit build_F(const ParameterizedUnitary& unitary, const StatePrepOracle& psi, std::span<const double> x,
                      HadamardVariant variant = HadamardVariant::imaginary);
OracleCircuit build_F(const ObservableSet& observables, const StatePrepOracle& psi, std::span<const double> x);

/// U_f = sum_k |k><k| (x) F(scale * k) on layout (x_1..x_M, ancilla, system).
/// Bit b of register j controls e^{-i theta_b G_j}, theta_b = 2 scale 2^b / 2^{n_j};
/// an ancilla-controlled e^{-i theta_0 G_j}, theta_0 = 2 scale (-1/2 + 1/2^{n_j+1}),
/// supplies the grid offset.
OracleCircuit build_probability_oracle(const ParameterizedUnitary& unitary, const StatePrepOracle& psi,
                                       std::span<const int> widths, double scale,
                                       HadamardVariant variant = HadamardVariant::imaginary);
/// Scale l * r for l in {-m..m} of the plan.
OracleCircuit build_probability_oracle(const ObservableSet& observables, const StatePrepOracle& psi,
                                       const GradientPlan& plan, int l);

/// Cost of one U_f application at a given scale (no circuit built).
OracleCharge probability_oracle_charge(std::span<const int> widths, double scale);

void apply_oracle(const OracleCircuit& oracle, StateVector& state, ResourceLedger& ledger);
void apply_oracle_inverse(const OracleCircuit& oracle, StateVector& state, ResourceLedger& ledger);

/// Probability that the named single-qubit register reads 1.
double flag_probability(const StateVector& state, std::string_view register_name = "ancilla");

/// f values over the grid read from a simulated U_f (circuit mode). Uses the
/// simulator's access to amplitudes; nothing is charged.
std::vector<double> extract_f_from_circuit(const HadamardTestFunction& function, std::span<const int> widths,
                                           double scale);

// ---------------------------------------------------------------------------

/// Phase oracle over the index grid: |k> -> e^{i power h(k)} |k>.
class PhaseOracle {
 public:
  virtual ~PhaseOracle() = default;

  virtual const std::vector<int>& widths() const = 0;
  /// h over the flattened grid, register 1 least significant.
  virtual const std::vector<double>& phase_table() const = 0;
  virtual double phase_error() const { return 0.0; }
  /// Ledger cost of one application at the given power.
  virtual void charge(double power, ResourceLedger& ledger) const = 0;
};

/// Phase function given directly on grid values; charges ceil(power / 2 pi) units.
class SyntheticPhaseOracle final : public PhaseOracle {
 public:
  SyntheticPhaseOracle(std::vector<int> widths, const std::function<double(std::span<const double>)>& h,
                       double phase_error = 0.0);

  const std::vector<int>& widths() const override { return widths_; }
  const std::vector<double>& phase_table() const override { return table_; }
  double phase_error() const override { return phase_error_; }
  void charge(double power, ResourceLedger& ledger) const override;

 private:
  std::vector<int> widths_;
  std::vector<double> table_;
  double phase_error_;
};

/// h(k) = sum_l a_l f(l r k): the central-difference combination over the
/// 2m+1 scaled probability oracles, with an idealized probability-to-phase
/// conversion.
class GradientPhaseOracle final : public PhaseOracle {
 public:
  GradientPhaseOracle(std::shared_ptr<const HadamardTestFunction> function, const GradientPlan& plan,
                      OracleSettings settings);
  /// Any f given pointwise (testing and synthetic objectives); analytic mode only.
  GradientPhaseOracle(std::function<double(std::span<const double>)> f, const GradientPlan& plan,
                      double phase_error = 0.0);

  const std::vector<int>& widths() const override { return widths_; }
  const std::vector<double>& phase_table() const override { return table_; }
  double phase_error() const override { return settings_.phase_error; }
  void charge(double power, ResourceLedger& ledger) const override;

  const GradientPlan& plan() const { return plan_; }
  OracleMode mode() const { return settings_.mode; }

 private:
  void build_charges();

  GradientPlan plan_;
  OracleSettings settings_;
  std::vector<int> widths_;
  std::vector<double> table_;
  std::vector<OracleCharge> per_scale_charge_;  // indexed by l + m
};

/// Applies e^{i power h(k)} to every index basis state. With a nonzero phase
/// error and a perturbation stream, each phase is shifted by a uniform draw
/// in [-epsilon', epsilon'].
void apply_phase_oracle(StateVector& index_state, const PhaseOracle& oracle, double power, ResourceLedger& ledger,
                        RngStream* perturbation = nullptr);

}  // namespace gradeval
