#pragma once

// Hermitian observables, their exponentials, and time-independent Hamiltonians.
//
// Pauli strings are written with one character per qubit, leftmost character
// on qubit 0 ("XZ" is X on qubit 0, Z on qubit 1). Dense matrices use the
// little-endian basis ordering of simcore.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gradeval/simcore.hpp"

namespace gradeval {

/// Dense bodies are capped at 2^10 x 2^10.
inline constexpr int kDenseCapQubits = 10;

struct PauliTerm {
  double coefficient = 0.0;
  std::string ops;  // characters in {I, X, Y, Z}
};

Matrix pauli_string_matrix(std::string_view ops);
bool pauli_strings_commute(std::string_view a, std::string_view b);
/// Applies a Pauli string to a vector in O(2^n).
Vector apply_pauli_string(std::string_view ops, const Vector& v);

class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(std::vector<PauliTerm> terms);

  /// Parses text like "1.5*XZI + 0.5*IYI - ZZI". A missing coefficient is 1.
  static PauliSum parse(std::string_view text);

  int num_qubits() const { return num_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  Matrix to_matrix() const;
  bool all_commute() const;
  /// Only I and Z factors: diagonal in the computational basis.
  bool is_diagonal() const;
  std::string to_string() const;

 private:
  std::vector<PauliTerm> terms_;
  int num_qubits_ = 0;
};

/// Hermitian operator with a cached eigendecomposition. Immutable.
class HermitianOperator {
 public:
  static HermitianOperator dense(Matrix body);
  static HermitianOperator pauli(PauliSum body);

  int num_qubits() const { return state_->num_qubits; }
  const Matrix& matrix() const { return state_->matrix; }
  const PauliSum* pauli_body() const { return state_->pauli ? &*state_->pauli : nullptr; }
  const RealVector& eigenvalues() const { return state_->eigenvalues; }
  const Matrix& eigenvectors() const { return state_->eigenvectors; }
  double spectral_norm() const { return state_->spectral_norm; }

  /// e^{-i x H}; Pauli sums of commuting strings use the per-string cos/sin form.
  Matrix exponential(double x) const;
  /// v <- e^{-i x H} v through the eigenbasis.
  void apply_exponential(double x, Vector& v) const;
  double expectation(const Vector& psi) const;
  bool is_diagonal() const;

 private:
  struct State {
    int num_qubits = 0;
    Matrix matrix;
    std::optional<PauliSum> pauli;
    RealVector eigenvalues;
    Matrix eigenvectors;
    double spectral_norm = 0.0;
  };
  explicit HermitianOperator(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  static std::shared_ptr<const State> build(Matrix body, std::optional<PauliSum> pauli);

  std::shared_ptr<const State> state_;
};

class Observable {
 public:
  /// Rejects non-Hermitian bodies and bodies whose spectral norm exceeds the bound.
  Observable(std::string id, HermitianOperator body, double norm_bound);

  static Observable dense(std::string id, Matrix body, double norm_bound);
  static Observable pauli(std::string id, std::string_view text, double norm_bound);

  const std::string& id() const { return id_; }
  double norm_bound() const { return norm_bound_; }
  const HermitianOperator& body() const { return body_; }
  int num_qubits() const { return body_.num_qubits(); }
  const Matrix& matrix() const { return body_.matrix(); }

 private:
  std::string id_;
  HermitianOperator body_;
  double norm_bound_;
};

/// e^{-i x O}.
Matrix evolve(const Observable& obs, double x);
double spectral_norm(const Observable& obs);

class Hamiltonian {
 public:
  explicit Hamiltonian(HermitianOperator body) : body_(std::move(body)) {}
  static Hamiltonian dense(Matrix body) { return Hamiltonian(HermitianOperator::dense(std::move(body))); }
  static Hamiltonian pauli(std::string_view text) {
    return Hamiltonian(HermitianOperator::pauli(PauliSum::parse(text)));
  }

  const HermitianOperator& body() const { return body_; }
  int num_qubits() const { return body_.num_qubits(); }

 private:
  HermitianOperator body_;
};

/// Evolution from time t_from to time t_to: e^{-i H (t_to - t_from)}.
Matrix time_evolution(const Hamiltonian& h, double t_from, double t_to);

class ObservableSet {
 public:
  /// Requires M >= 1, unique ids and a common system width.
  explicit ObservableSet(std::vector<Observable> observables);

  std::size_t size() const { return observables_.size(); }
  int num_qubits() const { return observables_.front().num_qubits(); }
  const Observable& operator[](std::size_t j) const { return observables_[j]; }
  const std::vector<Observable>& observables() const { return observables_; }
  auto begin() const { return observables_.begin(); }
  auto end() const { return observables_.end(); }

  std::vector<double> norm_bounds() const;

 private:
  std::vector<Observable> observables_;
};

}  // namespace gradeval
