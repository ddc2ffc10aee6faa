#include "gradeval/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gradeval {

namespace {

bool all_unit(const std::vector<double>& bounds) {
  return std::all_of(bounds.begin(), bounds.end(), [](double b) { return b == 1.0; });
}

void require_hermitian_unitary(const Matrix& op, const std::string& what) {
  if (op.rows() != op.cols()) throw std::invalid_argument(what + " is not square");
  if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument(what + " is not Hermitian");
  try {
    require_unitary(op);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument(what + " is not unitary");
  }
}

}  // namespace

GradientPipeline::GradientPipeline(GradientProblem problem, const EstimationOptions& options)
    : problem_(std::move(problem)), options_(options) {
  OracleSettings{options_.mode, options_.phase_error}.validate();
  const std::size_t M = problem_.unitary.dimension();
  if (problem_.bounds.size() != M) throw std::invalid_argument("one norm bound per parameter required");
  plan_ = all_unit(problem_.bounds) ? solve_plan_uniform(M, options_.epsilon, options_.delta, 2.0)
                                    : solve_plan_general(problem_.bounds, options_.epsilon, options_.delta);
  const int system = problem_.unitary.num_qubits();
  if (plan_.logical_qubits(system) > options_.max_qubits) {
    if (!options_.allow_clamp) {
      throw std::invalid_argument("plan needs " + std::to_string(plan_.logical_qubits(system)) +
                                  " qubits, over the budget of " + std::to_string(options_.max_qubits) +
                                  " (clamping not permitted)");
    }
    apply_qubit_budget(plan_, system, options_.max_qubits);
  }
  auto function = std::make_shared<HadamardTestFunction>(problem_.unitary, problem_.psi, problem_.variant);
  auto oracle =
      std::make_shared<GradientPhaseOracle>(function, plan_, OracleSettings{options_.mode, options_.phase_error});
  runner_ = std::make_unique<Algorithm1Runner>(plan_, std::move(oracle));
}

EstimationReport GradientPipeline::run(std::uint64_t seed, std::uint64_t trial) {
  const std::size_t M = plan_.M;
  EstimationReport report;
  report.pipeline = problem_.pipeline;
  report.ids = problem_.ids;
  report.references = problem_.references;
  report.plan = plan_;
  report.range_condition = range_condition_holds(plan_);
  report.ledger = ResourceLedger(M);
  report.ledger.note_qubits(plan_.logical_qubits(problem_.unitary.num_qubits()));
  report.seed = seed;
  report.trial = trial;
  report.mode = options_.mode;
  report.convention = problem_.convention;

  const RngStream rng(seed, trial);
  auto est = estimate_gradient(*runner_, rng, report.ledger);
  report.repetitions = std::move(est.repetitions);
  report.labels = std::move(est.labels);
  for (std::size_t j = 0; j < M; ++j) {
    const double value = problem_.sign * est.median[j];
    report.estimates.push_back(value);
    report.errors.push_back(std::abs(value - report.references[j]));
  }
  report.max_error = *std::max_element(report.errors.begin(), report.errors.end());
  report.success = report.max_error <= options_.epsilon;
  return report;
}

// ---------------------------------------------------------------------------

std::vector<double> reference_expectations(const ObservableSet& observables, const StatePrepOracle& psi) {
  std::vector<double> out;
  for (const auto& o : observables) out.push_back(o.body().expectation(psi.state()));
  return out;
}

GradientProblem expectation_problem(const ObservableSet& observables, const StatePrepOracle& psi) {
  if (observables.num_qubits() != psi.num_qubits()) {
    throw std::invalid_argument("observables and state act on different widths");
  }
  std::vector<std::string> ids;
  for (const auto& o : observables) ids.push_back(o.id());
  return GradientProblem{ParameterizedUnitary::product_of_exponentials(observables),
                         psi,
                         HadamardVariant::imaginary,
                         observables.norm_bounds(),
                         std::move(ids),
                         reference_expectations(observables, psi),
                         1.0,
                         "expectation",
                         "estimate_j = d/dx_j [1/2 - Im<psi|U(x)|psi>/2] at x = 0"};
}

EstimationReport estimate_expectations(const ObservableSet& observables, const StatePrepOracle& psi,
                                       const EstimationOptions& options, std::uint64_t seed) {
  GradientPipeline pipeline(expectation_problem(observables, psi), options);
  return pipeline.run(seed);
}

// ---------------------------------------------------------------------------

void CorrelationSpec::validate() const {
  if (probes.empty()) throw std::invalid_argument("correlation needs at least one probe operator");
  if (probes.size() != times.size()) throw std::invalid_argument("one time per probe operator required");
  const auto dim = Eigen::Index{1} << hamiltonian.num_qubits();
  for (std::size_t j = 0; j < probes.size(); ++j) {
    if (probes[j].rows() != dim) throw std::invalid_argument("probe " + std::to_string(j + 1) + " has wrong width");
    require_hermitian_unitary(probes[j], "probe " + std::to_string(j + 1));
    if (!std::isfinite(times[j])) throw std::invalid_argument("probe times must be finite");
    if (j > 0 && times[j] < times[j - 1]) throw std::invalid_argument("probe times must be nondecreasing");
  }
  if (source.rows() != dim) throw std::invalid_argument("source operator has wrong width");
  require_hermitian_unitary(source, "source operator");
}

std::vector<Complex> reference_correlations(const CorrelationSpec& spec, const StatePrepOracle& psi) {
  spec.validate();
  const Vector& v = psi.state();
  std::vector<Complex> out;
  for (std::size_t j = 0; j < spec.probes.size(); ++j) {
    const double t = spec.times[j];
    const Matrix forward = time_evolution(spec.hamiltonian, 0.0, t);  // U(t, 0)
    const Matrix backward = time_evolution(spec.hamiltonian, t, 0.0);  // U(0, t)
    out.push_back(v.dot(backward * spec.probes[j].adjoint() * forward * spec.source * v));
  }
  return out;
}

ParameterizedUnitary correlation_unitary(const CorrelationSpec& spec) {
  spec.validate();
  const std::size_t M = spec.probes.size();
  std::vector<HermitianOperator> gens;
  std::vector<std::optional<Matrix>> fixed(M + 1);
  double previous = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    gens.push_back(HermitianOperator::dense(spec.probes[j]));
    // U(t_{j-1}, t_j) = e^{-iH(t_{j-1} - t_j)}.
    fixed[j] = time_evolution(spec.hamiltonian, spec.times[j], previous);
    previous = spec.times[j];
  }
  fixed[M] = Matrix(time_evolution(spec.hamiltonian, 0.0, spec.times.back()) * spec.source);
  return ParameterizedUnitary(std::move(gens), std::move(fixed));
}

GradientProblem correlation_problem(const CorrelationSpec& spec, const StatePrepOracle& psi) {
  const auto exact = reference_correlations(spec, psi);
  const bool real = spec.part == CorrelationPart::real;
  std::vector<double> refs;
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < exact.size(); ++j) {
    refs.push_back(real ? exact[j].real() : exact[j].imag());
    ids.push_back("C" + std::to_string(j + 1) + (real ? ".re" : ".im"));
  }
  GradientProblem problem{correlation_unitary(spec),
                          psi,
                          real ? HadamardVariant::imaginary : HadamardVariant::real,
                          std::vector<double>(exact.size(), 1.0),
                          std::move(ids),
                          std::move(refs),
                          real ? 1.0 : -1.0,
                          "correlation",
                          real ? "Re C_j = d/dx_j [1/2 - Im<psi|U(x)|psi>/2] at x = 0"
                               : "Im C_j = -d/dx_j [1/2 - Re<psi|U(x)|psi>/2] at x = 0"};
  return problem;
}

EstimationReport estimate_correlations(const CorrelationSpec& spec, const StatePrepOracle& psi,
                                       const EstimationOptions& options, std::uint64_t seed) {
  GradientPipeline pipeline(correlation_problem(spec, psi), options);
  return pipeline.run(seed);
}

// ---------------------------------------------------------------------------

LowerBoundInstance build_lowerbound_instance(const RealMatrix& A, const RealVector& p) {
  const auto M = A.rows();
  if (M < 1 || A.cols() != M) throw std::invalid_argument("sign matrix must be square with M >= 1");
  if (p.size() != M) throw std::invalid_argument("probability vector length must equal M");
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j < M; ++j) {
      if (A(i, j) != 1.0 && A(i, j) != -1.0) throw std::invalid_argument("sign matrix entries must be +1 or -1");
    }
  }
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("p must be a probability vector");
  }
  int index_width = 1;
  while ((Eigen::Index{1} << index_width) < M) ++index_width;
  const int m = static_cast<int>(M);
  const int num_qubits = m + index_width + 1;
  if (num_qubits > kDenseCapQubits) throw std::invalid_argument("fixture too wide for dense simulation");

  // U_p on (index, purification): first column sum_j sqrt(p_j) |j>|0>.
  const auto sub_dim = Eigen::Index{1} << (index_width + 1);
  Vector target = Vector::Zero(sub_dim);
  for (Eigen::Index j = 0; j < M; ++j) target[j] = std::sqrt(p[j]);
  target.normalize();
  const Matrix Up = StatePrepOracle::from_state(target).unitary();
  const auto sign_dim = Eigen::Index{1} << m;
  const auto dim = sign_dim * sub_dim;
  Matrix lifted = Matrix::Zero(dim, dim);  // U_p on the high bits, identity on the sign qubits
  for (Eigen::Index r = 0; r < sub_dim; ++r) {
    for (Eigen::Index c = 0; c < sub_dim; ++c) {
      lifted.block(r * sign_dim, c * sign_dim, sign_dim, sign_dim) =
          Up(r, c) * Matrix::Identity(sign_dim, sign_dim);
    }
  }
  // U_A: on index branch j, X on every sign qubit i with A_ij = -1.
  Matrix UA = Matrix::Zero(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const auto j = static_cast<Eigen::Index>((static_cast<std::uint64_t>(b) >> m) & ((1ULL << index_width) - 1));
    std::uint64_t flips = 0;
    if (j < M) {
      for (int i = 0; i < m; ++i) {
        if (A(i, j) == -1.0) flips |= std::uint64_t{1} << i;
      }
    }
    UA(static_cast<Eigen::Index>(static_cast<std::uint64_t>(b) ^ flips), b) = 1.0;
  }
  std::vector<Observable> zs;
  for (int i = 0; i < m; ++i) {
    std::string ops(static_cast<std::size_t>(num_qubits), 'I');
    ops[static_cast<std::size_t>(i)] = 'Z';
    zs.push_back(Observable::pauli("Z" + std::to_string(i + 1), ops, 1.0));
  }
  return LowerBoundInstance{A, p, index_width, num_qubits, StatePrepOracle(UA * lifted), ObservableSet(std::move(zs)),
                            A * p};
}

double fixture_deviation(const LowerBoundInstance& instance) {
  const auto z = reference_expectations(instance.observables, instance.psi);
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    worst = std::max(worst, std::abs(z[i] - instance.expected[static_cast<Eigen::Index>(i)]));
  }
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

// Multinomial counts by sequential conditional binomials.
std::vector<std::uint64_t> multinomial(std::uint64_t shots, const std::vector<double>& probs, RngStream& rng) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  double remaining_mass = 1.0;
  std::uint64_t remaining = shots;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double q = remaining_mass > 0.0 ? std::clamp(probs[i] / remaining_mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, q);
    counts[i] = draw(rng);
    remaining -= counts[i];
    remaining_mass -= probs[i];
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

}  // namespace

SamplingResult sampling_baseline(const ObservableSet& observables, const StatePrepOracle& psi, std::uint64_t budget,
                                 RngStream& rng) {
  const std::size_t M = observables.size();
  std::vector<std::size_t> diagonal, other;
  for (std::size_t j = 0; j < M; ++j) (observables[j].body().is_diagonal() ? diagonal : other).push_back(j);
  const std::size_t groups = (diagonal.empty() ? 0 : 1) + other.size();
  if (budget < groups) throw std::invalid_argument("sampling budget smaller than the number of measurement groups");

  SamplingResult result;
  result.estimates.assign(M, 0.0);
  result.groups = groups;
  result.ledger = ResourceLedger(M);
  result.ledger.u_psi_forward = budget;
  result.ledger.note_qubits(observables.num_qubits());

  const Vector& v = psi.state();
  std::size_t group = 0;
  auto shots_for = [&]() {
    const std::uint64_t base = budget / groups;
    return base + (group++ < budget % groups ? 1 : 0);
  };
  if (!diagonal.empty()) {
    const std::uint64_t shots = shots_for();
    std::vector<double> probs(static_cast<std::size_t>(v.size()));
    for (Eigen::Index b = 0; b < v.size(); ++b) probs[static_cast<std::size_t>(b)] = std::norm(v[b]);
    const auto counts = multinomial(shots, probs, rng);
    for (std::size_t j : diagonal) {
      const auto& diag = observables[j].matrix().diagonal();
      double sum = 0.0;
      for (std::size_t b = 0; b < counts.size(); ++b) {
        sum += static_cast<double>(counts[b]) * diag[static_cast<Eigen::Index>(b)].real();
      }
      result.estimates[j] = sum / static_cast<double>(shots);
    }
  }
  for (std::size_t j : other) {
    const std::uint64_t shots = shots_for();
    const auto& body = observables[j].body();
    const Vector amplitudes = body.eigenvectors().adjoint() * v;
    std::vector<double> probs(static_cast<std::size_t>(amplitudes.size()));
    for (Eigen::Index k = 0; k < amplitudes.size(); ++k) probs[static_cast<std::size_t>(k)] = std::norm(amplitudes[k]);
    const auto counts = multinomial(shots, probs, rng);
    double sum = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      sum += static_cast<double>(counts[k]) * body.eigenvalues()[static_cast<Eigen::Index>(k)];
    }
    result.estimates[j] = sum / static_cast<double>(shots);
  }
  return result;
}

}  // namespace gradeval
