#pragma once

// End-to-end estimators built on the gradient routine: expectation values,
// two-time correlation functions and the sign-matrix fixture, plus a naive
// prepare-and-measure baseline.

#include <memory>
#include <string>
#include <vector>

#include "gradeval/gradient.hpp"
#include "gradeval/operators.hpp"
#include "gradeval/oracles.hpp"

namespace gradeval {

struct EstimationOptions {
  double epsilon = 0.1;
  double delta = 1.0 / 3.0;
  OracleMode mode = OracleMode::analytic;
  double phase_error = 0.0;
  int max_qubits = 24;
  bool allow_clamp = false;
};

struct EstimationReport {
  std::string pipeline;
  std::vector<std::string> ids;
  std::vector<double> estimates;
  std::vector<double> references;
  std::vector<double> errors;
  double max_error = 0.0;
  bool success = false;
  GradientPlan plan;
  bool range_condition = true;
  ResourceLedger ledger;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  OracleMode mode = OracleMode::analytic;
  std::string convention;
  std::vector<std::vector<double>> repetitions;
  std::vector<std::vector<std::uint64_t>> labels;
};

/// What the gradient routine is pointed at: f(x) from a Hadamard test on
/// U(x)|psi>, whose gradient at 0 times `sign` gives the targets.
struct GradientProblem {
  ParameterizedUnitary unitary;
  StatePrepOracle psi;
  HadamardVariant variant = HadamardVariant::imaginary;
  std::vector<double> bounds;  // B_j; all ones selects the uniform plan
  std::vector<std::string> ids;
  std::vector<double> references;
  double sign = 1.0;
  std::string pipeline = "expectation";
  std::string convention;
};

/// Plans once, tabulates the phase oracle once, then runs seeded trials.
class GradientPipeline {
 public:
  GradientPipeline(GradientProblem problem, const EstimationOptions& options);

  EstimationReport run(std::uint64_t seed, std::uint64_t trial = 0);

  const GradientPlan& plan() const { return plan_; }
  const GradientProblem& problem() const { return problem_; }

 private:
  GradientProblem problem_;
  EstimationOptions options_;
  GradientPlan plan_;
  std::unique_ptr<Algorithm1Runner> runner_;
};

/// Dense reference <psi|O_j|psi>.
std::vector<double> reference_expectations(const ObservableSet& observables, const StatePrepOracle& psi);

GradientProblem expectation_problem(const ObservableSet& observables, const StatePrepOracle& psi);

EstimationReport estimate_expectations(const ObservableSet& observables, const StatePrepOracle& psi,
                                       const EstimationOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------

enum class CorrelationPart { real, imaginary };

struct CorrelationSpec {
  Hamiltonian hamiltonian;
  std::vector<Matrix> probes;  // A_j, Hermitian and unitary
  std::vector<double> times;   // t_1 <= ... <= t_M
  Matrix source;               // B, Hermitian and unitary
  CorrelationPart part = CorrelationPart::real;

  /// Throws on non-unitary or non-Hermitian operators and decreasing times.
  void validate() const;
};

/// C_j = <psi| U(0,t_j) A_j U(t_j,0) B |psi>, U(t,t') = e^{-iH(t - t')}.
std::vector<Complex> reference_correlations(const CorrelationSpec& spec, const StatePrepOracle& psi);

/// U(x) = prod_j U(t_{j-1}, t_j) e^{-2i x_j A_j}, times U(t_M, t_0) B, with t_0 = 0.
ParameterizedUnitary correlation_unitary(const CorrelationSpec& spec);

/// Real part: gradient of the imaginary-variant test. Imaginary part: minus
/// the gradient of the real-variant test.
GradientProblem correlation_problem(const CorrelationSpec& spec, const StatePrepOracle& psi);

EstimationReport estimate_correlations(const CorrelationSpec& spec, const StatePrepOracle& psi,
                                       const EstimationOptions& options, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// System qubits: M sign qubits, an index register of max(1, ceil(log2 M))
/// qubits, one purification qubit.
struct LowerBoundInstance {
  RealMatrix A;
  RealVector p;
  int index_width = 0;
  int num_qubits = 0;
  StatePrepOracle psi;
  ObservableSet observables;
  RealVector expected;  // A p
};

LowerBoundInstance build_lowerbound_instance(const RealMatrix& A, const RealVector& p);

/// max_i |(A p)_i - <Z_i>|.
double fixture_deviation(const LowerBoundInstance& instance);

// ---------------------------------------------------------------------------

struct SamplingResult {
  std::vector<double> estimates;
  std::size_t groups = 0;
  ResourceLedger ledger;
};

/// Repeat-prepare-and-measure with `budget` U_psi calls split evenly over
/// measurement groups: all computational-basis-diagonal observables share one
/// group, every other observable is measured alone in its eigenbasis.
SamplingResult sampling_baseline(const ObservableSet& observables, const StatePrepOracle& psi, std::uint64_t budget,
                                 RngStream& rng);

}  // namespace gradeval
