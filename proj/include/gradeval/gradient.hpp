#pragma once

// Gradient estimation: parameter planning, central-difference coefficients,
// the phase-estimation routine over the index grid, decoding and the median.

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gradeval/oracles.hpp"
#include "gradeval/plan.hpp"
#include "gradeval/simcore.hpp"

namespace gradeval {

/// Antisymmetric a_l, l = -m..m (stored at l + m), with sum_l a_l l^p equal
/// to 1 for p = 1 and 0 for every other p <= 2m. Odd moments come from an
/// m x m Vandermonde-type system; even moments vanish by symmetry.
template <typename Scalar = double>
std::vector<Scalar> difference_coefficients(int m) {
  if (m < 1) throw std::invalid_argument("difference order m must be >= 1");
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Mat A(m, m);
  Vec rhs = Vec::Zero(m);
  rhs(0) = Scalar(1);
  for (int row = 0; row < m; ++row) {
    const int p = 2 * row + 1;
    for (int l = 1; l <= m; ++l) {
      Scalar power(1);
      for (int e = 0; e < p; ++e) power *= Scalar(l);
      A(row, l - 1) = Scalar(2) * power;
    }
  }
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) throw std::runtime_error("difference-coefficient system is singular");
  const Vec a = lu.solve(rhs);
  std::vector<Scalar> out(static_cast<std::size_t>(2 * m + 1), Scalar(0));
  for (int l = 1; l <= m; ++l) {
    out[static_cast<std::size_t>(m + l)] = a(l - 1);
    out[static_cast<std::size_t>(m - l)] = -a(l - 1);
  }
  return out;
}

/// sum_l a_l l^p for coefficients stored at l + m.
template <typename Scalar>
Scalar difference_moment(const std::vector<Scalar>& a, int p) {
  const int m = static_cast<int>(a.size() / 2);
  Scalar sum(0);
  for (int l = -m; l <= m; ++l) {
    Scalar power(1);
    for (int e = 0; e < p; ++e) power *= Scalar(l);
    sum += a[static_cast<std::size_t>(l + m)] * power;
  }
  return sum;
}

/// ceil(18 ln(2M / delta)).
int repetitions_for(std::size_t M, double delta);

/// Uniform derivative bound c (c = 2 for expectation values).
GradientPlan solve_plan_uniform(std::size_t M, double epsilon, double delta, double c = 2.0);
/// Per-observable norm bounds B; z = 2B.
GradientPlan solve_plan_general(std::span<const double> bounds, double epsilon, double delta);

/// N_i > 2 S r z_i for every register.
bool range_condition_holds(const GradientPlan& plan);

/// Shrinks index widths (widest first) until N + 1 + sum n_i <= max_qubits.
/// Marks the plan clamped. Throws if even n_i = 1 does not fit.
void apply_qubit_budget(GradientPlan& plan, int system_qubits, int max_qubits);

/// g_i = N_i k_i / (S r) = N_i k_i epsilon / 4.
double decode(const GradientPlan& plan, double k_value, std::size_t component);

/// Component-wise median of a T x M table; lower median for even T.
std::vector<double> median_aggregate(const std::vector<std::vector<double>>& rows);

struct Algorithm1Outcome {
  std::vector<std::uint64_t> labels;
  std::vector<double> values;     // G_{n_i} decoding of each label
  std::vector<double> estimates;  // decoded gradient components
};

/// Hadamard transform, one phase-oracle application at power 2 pi S, inverse
/// grid QFT per register, measurement. Without phase error the pre-measurement
/// state is deterministic and is prepared once; the ledger is still charged per
/// run.
class Algorithm1Runner {
 public:
  Algorithm1Runner(const GradientPlan& plan, std::shared_ptr<const PhaseOracle> oracle);

  Algorithm1Outcome run(RngStream& rng, ResourceLedger& ledger);
  /// Prepared (pre-measurement) state for a given perturbation stream.
  StateVector prepare(ResourceLedger& ledger, RngStream* perturbation = nullptr) const;

  const GradientPlan& plan() const { return plan_; }
  const RegisterLayout& layout() const { return layout_; }
  double power() const { return 2.0 * kPi * plan_.S; }

 private:
  GradientPlan plan_;
  std::shared_ptr<const PhaseOracle> oracle_;
  RegisterLayout layout_;
  std::optional<Sampler> cached_;
};

Algorithm1Outcome run_algorithm1(const GradientPlan& plan, std::shared_ptr<const PhaseOracle> oracle,
                                 RngStream& rng, ResourceLedger& ledger);

struct GradientEstimate {
  std::vector<double> median;
  std::vector<std::vector<double>> repetitions;  // T x M decoded estimates
  std::vector<std::vector<std::uint64_t>> labels;
};

/// T repetitions on streams rng.substream(t), then the median.
GradientEstimate estimate_gradient(Algorithm1Runner& runner, const RngStream& rng, ResourceLedger& ledger);

}  // namespace gradeval
