#include "gradeval/operators.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gradeval {

namespace {

constexpr double kHermitianTolerance = 1e-10;
constexpr double kNormSlack = 1e-9;

void check_pauli_chars(std::string_view ops) {
  if (ops.empty()) throw std::invalid_argument("empty Pauli string");
  for (char c : ops) {
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw std::invalid_argument("invalid Pauli character '" + std::string(1, c) + "'");
    }
  }
}

}  // namespace

Vector apply_pauli_string(std::string_view ops, const Vector& v) {
  std::uint64_t xmask = 0;
  std::uint64_t zmask = 0;
  int y_count = 0;
  for (std::size_t q = 0; q < ops.size(); ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    switch (ops[q]) {
      case 'X': xmask |= bit; break;
      case 'Y': xmask |= bit; zmask |= bit; ++y_count; break;
      case 'Z': zmask |= bit; break;
      default: break;
    }
  }
  // Y = i X Z, so P|b> = i^{#Y} (-1)^{popcount(b & zmask)} |b ^ xmask>.
  static constexpr Complex kIPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex global = kIPowers[y_count % 4];
  Vector out(v.size());
  for (Eigen::Index b = 0; b < v.size(); ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    const double sign = (std::popcount(ub & zmask) & 1) ? -1.0 : 1.0;
    out[static_cast<Eigen::Index>(ub ^ xmask)] = global * sign * v[b];
  }
  return out;
}

Matrix pauli_string_matrix(std::string_view ops) {
  check_pauli_chars(ops);
  if (ops.size() > static_cast<std::size_t>(kDenseCapQubits)) {
    throw std::invalid_argument("Pauli string wider than the dense cap");
  }
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << ops.size());
  Matrix m(dim, dim);
  Vector e = Vector::Zero(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    e.setZero();
    e[b] = 1.0;
    m.col(b) = apply_pauli_string(ops, e);
  }
  return m;
}

bool pauli_strings_commute(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) throw std::invalid_argument("Pauli strings of different widths");
  int anticommuting = 0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q]) ++anticommuting;
  }
  return anticommuting % 2 == 0;
}

// ---------------------------------------------------------------------------

PauliSum::PauliSum(std::vector<PauliTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("Pauli sum needs at least one term");
  num_qubits_ = static_cast<int>(terms_.front().ops.size());
  for (const auto& t : terms_) {
    check_pauli_chars(t.ops);
    if (static_cast<int>(t.ops.size()) != num_qubits_) {
      throw std::invalid_argument("Pauli strings in a sum must share one width");
    }
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("non-finite Pauli coefficient");
  }
  if (num_qubits_ > kDenseCapQubits) throw std::invalid_argument("Pauli sum wider than the dense cap");
}

PauliSum PauliSum::parse(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  if (s.empty()) throw std::invalid_argument("empty Pauli expression");
  std::vector<PauliTerm> terms;
  std::size_t pos = 0;
  while (pos < s.size()) {
    double sign = 1.0;
    bool had_sign = false;
    while (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      if (s[pos] == '-') sign = -sign;
      had_sign = true;
      ++pos;
    }
    if (!terms.empty() && !had_sign) throw std::invalid_argument("expected '+' or '-' between Pauli terms");
    double coefficient = 1.0;
    if (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) {
      const auto star = s.find('*', pos);
      if (star == std::string::npos) throw std::invalid_argument("expected '*' after Pauli coefficient");
      const char* first = s.data() + pos;
      const char* last = s.data() + star;
      auto [ptr, ec] = std::from_chars(first, last, coefficient);
      if (ec != std::errc{} || ptr != last) {
        throw std::invalid_argument("bad Pauli coefficient '" + s.substr(pos, star - pos) + "'");
      }
      pos = star + 1;
    }
    const std::size_t start = pos;
    while (pos < s.size() && std::string_view("IXYZ").find(s[pos]) != std::string_view::npos) ++pos;
    if (pos == start) throw std::invalid_argument("expected a Pauli string at offset " + std::to_string(start));
    terms.push_back(PauliTerm{sign * coefficient, s.substr(start, pos - start)});
  }
  return PauliSum(std::move(terms));
}

Matrix PauliSum::to_matrix() const {
  const auto dim = static_cast<Eigen::Index>(std::uint64_t{1} << num_qubits_);
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& t : terms_) m += t.coefficient * pauli_string_matrix(t.ops);
  return m;
}

bool PauliSum::all_commute() const {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    for (std::size_t j = i + 1; j < terms_.size(); ++j) {
      if (!pauli_strings_commute(terms_[i].ops, terms_[j].ops)) return false;
    }
  }
  return true;
}

bool PauliSum::is_diagonal() const {
  for (const auto& t : terms_) {
    if (t.ops.find_first_of("XY") != std::string::npos) return false;
  }
  return true;
}

std::string PauliSum::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const double c = terms_[i].coefficient;
    if (i > 0) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    os << std::abs(c) << "*" << terms_[i].ops;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

std::shared_ptr<const HermitianOperator::State> HermitianOperator::build(Matrix body,
                                                                        std::optional<PauliSum> pauli) {
  if (body.rows() != body.cols() || body.rows() < 2) throw std::invalid_argument("operator must be square");
  const auto dim = static_cast<std::uint64_t>(body.rows());
  if (std::popcount(dim) != 1) throw std::invalid_argument("operator dimension must be a power of two");
  const int n = std::countr_zero(dim);
  if (n > kDenseCapQubits) throw std::invalid_argument("operator dimension over the dense cap");
  const double asym = (body - body.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym < kHermitianTolerance)) {
    throw std::invalid_argument("operator is not Hermitian (deviation " + std::to_string(asym) + ")");
  }
  auto state = std::make_shared<State>();
  state->num_qubits = n;
  state->matrix = 0.5 * (body + body.adjoint());
  state->pauli = std::move(pauli);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(state->matrix);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  state->eigenvalues = solver.eigenvalues();
  state->eigenvectors = solver.eigenvectors();
  state->spectral_norm = state->eigenvalues.cwiseAbs().maxCoeff();
  return state;
}

HermitianOperator HermitianOperator::dense(Matrix body) {
  return HermitianOperator(build(std::move(body), std::nullopt));
}

HermitianOperator HermitianOperator::pauli(PauliSum body) {
  Matrix m = body.to_matrix();
  return HermitianOperator(build(std::move(m), std::move(body)));
}

Matrix HermitianOperator::exponential(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("evolution duration must be finite");
  const auto& s = *state_;
  if (s.pauli && s.pauli->all_commute()) {
    const auto dim = s.matrix.rows();
    Matrix result = Matrix::Identity(dim, dim);
    for (const auto& t : s.pauli->terms()) {
      // e^{-i x c P} = cos(xc) I - i sin(xc) P, applied to every column.
      const double angle = x * t.coefficient;
      for (Eigen::Index col = 0; col < dim; ++col) {
        Vector v = result.col(col);
        result.col(col) = std::cos(angle) * v - Complex(0, std::sin(angle)) * apply_pauli_string(t.ops, v);
      }
    }
    return result;
  }
  const Vector phases = (s.eigenvalues.cast<Complex>() * Complex(0, -x)).array().exp().matrix();
  return s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
}

void HermitianOperator::apply_exponential(double x, Vector& v) const {
  const auto& s = *state_;
  Vector coeffs = s.eigenvectors.adjoint() * v;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs[i] *= std::polar(1.0, -x * s.eigenvalues[i]);
  v.noalias() = s.eigenvectors * coeffs;
}

double HermitianOperator::expectation(const Vector& psi) const {
  return psi.dot(state_->matrix * psi).real();
}

bool HermitianOperator::is_diagonal() const {
  const auto& m = state_->matrix;
  const Matrix off = m - Matrix(m.diagonal().asDiagonal());
  return off.cwiseAbs().maxCoeff() < 1e-12;
}

// ---------------------------------------------------------------------------

Observable::Observable(std::string id, HermitianOperator body, double norm_bound)
    : id_(std::move(id)), body_(std::move(body)), norm_bound_(norm_bound) {
  if (id_.empty()) throw std::invalid_argument("observable id must be non-empty");
  if (!(norm_bound_ > 0.0) || !std::isfinite(norm_bound_)) {
    throw std::invalid_argument("observable '" + id_ + "' needs a positive norm bound");
  }
  if (body_.spectral_norm() > norm_bound_ + kNormSlack) {
    throw std::invalid_argument("observable '" + id_ + "' has spectral norm " +
                                std::to_string(body_.spectral_norm()) + " above its declared bound " +
                                std::to_string(norm_bound_));
  }
}

Observable Observable::dense(std::string id, Matrix body, double norm_bound) {
  return Observable(std::move(id), HermitianOperator::dense(std::move(body)), norm_bound);
}

Observable Observable::pauli(std::string id, std::string_view text, double norm_bound) {
  return Observable(std::move(id), HermitianOperator::pauli(PauliSum::parse(text)), norm_bound);
}

Matrix evolve(const Observable& obs, double x) { return obs.body().exponential(x); }

double spectral_norm(const Observable& obs) { return obs.body().spectral_norm(); }

Matrix time_evolution(const Hamiltonian& h, double t_from, double t_to) {
  return h.body().exponential(t_to - t_from);
}

// ---------------------------------------------------------------------------

ObservableSet::ObservableSet(std::vector<Observable> observables) : observables_(std::move(observables)) {
  if (observables_.empty()) throw std::invalid_argument("observable set needs M >= 1");
  std::set<std::string> ids;
  for (const auto& o : observables_) {
    if (!ids.insert(o.id()).second) throw std::invalid_argument("duplicate observable id '" + o.id() + "'");
    if (o.num_qubits() != observables_.front().num_qubits()) {
      throw std::invalid_argument("observables act on different system widths");
    }
  }
}

std::vector<double> ObservableSet::norm_bounds() const {
  std::vector<double> out;
  out.reserve(observables_.size());
  for (const auto& o : observables_) out.push_back(o.norm_bound());
  return out;
}

}  // namespace gradeval
