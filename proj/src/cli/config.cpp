#include "gradeval/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gradeval::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "required field is missing");
  return *it;
}

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

double as_number(const Json& node, const std::string& field) {
  if (!node.is_number()) throw ConfigError(field, "expected a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "expected a finite number");
  return v;
}

std::optional<double> opt_number(const Json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  return as_number(*it, join(path, key));
}

std::string as_string(const Json& node, const std::string& field) {
  if (!node.is_string()) throw ConfigError(field, "expected a string");
  return node.get<std::string>();
}

int as_int(const Json& node, const std::string& field) {
  if (!node.is_number_integer()) throw ConfigError(field, "expected an integer");
  return node.get<int>();
}

std::uint64_t as_u64(const Json& node, const std::string& field) {
  if (!node.is_number_unsigned() && !(node.is_number_integer() && node.get<std::int64_t>() >= 0)) {
    throw ConfigError(field, "expected a non-negative integer");
  }
  return node.get<std::uint64_t>();
}

bool as_bool(const Json& node, const std::string& field) {
  if (!node.is_boolean()) throw ConfigError(field, "expected true or false");
  return node.get<bool>();
}

Complex as_complex(const Json& node, const std::string& field) {
  if (node.is_number()) return {as_number(node, field), 0.0};
  if (node.is_array() && node.size() == 2) return {as_number(node[0], field + "[0]"), as_number(node[1], field + "[1]")};
  throw ConfigError(field, "expected a number or a [re, im] pair");
}

template <typename F>
auto wrap(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

HermitianOperator parse_operator(const Json& node, const std::string& path, std::set<std::string> extra = {}) {
  std::set<std::string> allowed{"kind", "data"};
  allowed.insert(extra.begin(), extra.end());
  check_keys(node, allowed, path);
  const auto kind = as_string(require(node, "kind", path), join(path, "kind"));
  const auto& data = require(node, "data", path);
  if (kind == "pauli") {
    const auto text = as_string(data, join(path, "data"));
    return wrap(join(path, "data"), [&] { return HermitianOperator::pauli(PauliSum::parse(text)); });
  }
  if (kind == "dense") {
    Matrix m = parse_matrix(data, join(path, "data"));
    return wrap(join(path, "data"), [&] { return HermitianOperator::dense(std::move(m)); });
  }
  throw ConfigError(join(path, "kind"), "expected \"pauli\" or \"dense\", got \"" + kind + "\"");
}

ObservableSet parse_observables(const Json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) throw ConfigError(path, "expected a non-empty array of observables");
  std::vector<Observable> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto p = index(path, i);
    const auto& o = node[i];
    check_keys(o, {"id", "kind", "data", "norm_bound"}, p);
    const auto id = as_string(require(o, "id", p), join(p, "id"));
    auto body = parse_operator(o, p, {"id", "norm_bound"});
    const double bound = as_number(require(o, "norm_bound", p), join(p, "norm_bound"));
    out.push_back(wrap(join(p, "norm_bound"), [&] { return Observable(id, body, bound); }));
  }
  return wrap(path, [&] { return ObservableSet(std::move(out)); });
}

CorrelationConfig parse_correlation(const Json& node, const std::string& path) {
  check_keys(node, {"hamiltonian", "probes", "source", "part"}, path);
  auto h = Hamiltonian(parse_operator(require(node, "hamiltonian", path), join(path, "hamiltonian")));
  const auto& probes = require(node, "probes", path);
  const auto probes_path = join(path, "probes");
  if (!probes.is_array() || probes.empty()) throw ConfigError(probes_path, "expected a non-empty array");
  CorrelationConfig cfg{h, {}, {}, Matrix(), {}};
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto p = index(probes_path, i);
    cfg.probes.push_back(parse_operator(probes[i], p, {"time"}).matrix());
    cfg.times.push_back(as_number(require(probes[i], "time", p), join(p, "time")));
  }
  cfg.source = parse_operator(require(node, "source", path), join(path, "source")).matrix();
  const std::string part = node.contains("part") ? as_string(node["part"], join(path, "part")) : "real";
  if (part == "real") cfg.parts = {CorrelationPart::real};
  else if (part == "imaginary") cfg.parts = {CorrelationPart::imaginary};
  else if (part == "both") cfg.parts = {CorrelationPart::real, CorrelationPart::imaginary};
  else throw ConfigError(join(path, "part"), "expected \"real\", \"imaginary\" or \"both\"");
  CorrelationSpec check{cfg.hamiltonian, cfg.probes, cfg.times, cfg.source, CorrelationPart::real};
  wrap(path, [&] { check.validate(); return 0; });
  return cfg;
}

FixtureConfig parse_fixture(const Json& node, const std::string& path) {
  check_keys(node, {"A", "p", "estimate", "random_instances", "max_M"}, path);
  FixtureConfig cfg;
  const auto& a = require(node, "A", path);
  const auto ap = join(path, "A");
  if (!a.is_array() || a.empty()) throw ConfigError(ap, "expected a square array of +1/-1 rows");
  const auto M = static_cast<Eigen::Index>(a.size());
  cfg.A.resize(M, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const auto& row = a[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != M) {
      throw ConfigError(index(ap, static_cast<std::size_t>(i)), "expected a row of length " + std::to_string(M));
    }
    for (Eigen::Index j = 0; j < M; ++j) {
      cfg.A(i, j) = as_number(row[static_cast<std::size_t>(j)],
                              index(index(ap, static_cast<std::size_t>(i)), static_cast<std::size_t>(j)));
    }
  }
  const auto& p = require(node, "p", path);
  const auto pp = join(path, "p");
  if (!p.is_array()) throw ConfigError(pp, "expected an array");
  cfg.p.resize(static_cast<Eigen::Index>(p.size()));
  for (std::size_t j = 0; j < p.size(); ++j) cfg.p[static_cast<Eigen::Index>(j)] = as_number(p[j], index(pp, j));
  wrap(path, [&] { return build_lowerbound_instance(cfg.A, cfg.p).num_qubits; });
  if (node.contains("estimate")) cfg.estimate = as_bool(node["estimate"], join(path, "estimate"));
  if (node.contains("random_instances")) {
    cfg.random_instances = as_int(node["random_instances"], join(path, "random_instances"));
    if (cfg.random_instances < 0) throw ConfigError(join(path, "random_instances"), "must be >= 0");
  }
  if (node.contains("max_M")) {
    cfg.max_M = as_int(node["max_M"], join(path, "max_M"));
    if (cfg.max_M < 1 || cfg.max_M > 4) throw ConfigError(join(path, "max_M"), "must lie in [1, 4]");
  }
  return cfg;
}

CostParams parse_cost_params(const Json& node, const std::string& path) {
  check_keys(node, {"scenario", "M", "N", "k", "epsilon", "delta", "B_bar", "g", "alpha", "Gamma", "Delta", "bounds",
                    "times"},
             path);
  CostParams p;
  p.M = opt_number(node, "M", path);
  p.N = opt_number(node, "N", path);
  p.k = opt_number(node, "k", path);
  p.epsilon = opt_number(node, "epsilon", path);
  p.delta = opt_number(node, "delta", path);
  p.B_bar = opt_number(node, "B_bar", path);
  p.g = opt_number(node, "g", path);
  p.alpha = opt_number(node, "alpha", path);
  p.Gamma = opt_number(node, "Gamma", path);
  p.Delta = opt_number(node, "Delta", path);
  for (const char* key : {"bounds", "times"}) {
    if (!node.contains(key)) continue;
    const auto& arr = node[key];
    const auto fp = join(path, key);
    if (!arr.is_array()) throw ConfigError(fp, "expected an array of numbers");
    auto& dst = std::string(key) == "bounds" ? p.bounds : p.times;
    for (std::size_t i = 0; i < arr.size(); ++i) dst.push_back(as_number(arr[i], index(fp, i)));
  }
  return p;
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

std::string to_string(Task task) {
  switch (task) {
    case Task::estimate: return "estimate";
    case Task::correlate: return "correlate";
    case Task::fixture: return "fixture";
    case Task::cost: return "cost";
    case Task::benchmark: return "benchmark";
  }
  return "unknown";
}

std::string to_string(OracleMode mode) { return mode == OracleMode::analytic ? "analytic" : "circuit"; }

Matrix parse_matrix(const Json& node, const std::string& field) {
  if (!node.is_array() || node.empty()) throw ConfigError(field, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  Matrix m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = node[static_cast<std::size_t>(i)];
    const auto rp = index(field, static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw ConfigError(rp, "expected a row of length " + std::to_string(rows) + " (matrix must be square)");
    }
    for (Eigen::Index j = 0; j < rows; ++j) {
      m(i, j) = as_complex(row[static_cast<std::size_t>(j)], index(rp, static_cast<std::size_t>(j)));
    }
  }
  return m;
}

StatePrepOracle parse_state(const Json& node, const std::string& field) {
  check_keys(node, {"kind", "data"}, field);
  const auto kind = as_string(require(node, "kind", field), join(field, "kind"));
  const auto& data = require(node, "data", field);
  const auto dp = join(field, "data");
  if (kind == "basis" || kind == "product") {
    // One character per qubit, leftmost on qubit 0.
    const auto text = as_string(data, dp);
    if (text.empty() || text.size() > static_cast<std::size_t>(kDenseCapQubits)) {
      throw ConfigError(dp, "expected 1 to " + std::to_string(kDenseCapQubits) + " qubit characters");
    }
    const double s = 1.0 / std::sqrt(2.0);
    Vector psi = Vector::Ones(1);
    for (std::size_t q = 0; q < text.size(); ++q) {
      Vector single(2);
      switch (text[q]) {
        case '0': single << 1, 0; break;
        case '1': single << 0, 1; break;
        case '+': single << s, s; break;
        case '-': single << s, -s; break;
        case 'r': single << s, Complex(0, s); break;
        case 'l': single << s, Complex(0, -s); break;
        default:
          throw ConfigError(dp, std::string("unknown qubit character '") + text[q] + "' (use 0 1 + - r l)");
      }
      if (kind == "basis" && text[q] != '0' && text[q] != '1') throw ConfigError(dp, "basis labels use only 0 and 1");
      // Qubit q is bit q: new qubits are the more significant factor.
      Vector next(psi.size() * 2);
      next.head(psi.size()) = single[0] * psi;
      next.tail(psi.size()) = single[1] * psi;
      psi = next;
    }
    return StatePrepOracle::from_state(psi);
  }
  if (kind == "amplitudes") {
    if (!data.is_array() || data.empty()) throw ConfigError(dp, "expected an array of amplitudes");
    Vector psi(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) psi[static_cast<Eigen::Index>(i)] = as_complex(data[i], index(dp, i));
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-6) {
      throw ConfigError(dp, "amplitudes must be normalized (norm " + std::to_string(norm) + ")");
    }
    psi /= norm;
    return wrap(dp, [&] { return StatePrepOracle::from_state(psi); });
  }
  if (kind == "unitary") {
    Matrix u = parse_matrix(data, dp);
    return wrap(dp, [&] { return StatePrepOracle(std::move(u)); });
  }
  throw ConfigError(join(field, "kind"), "expected basis, product, amplitudes or unitary, got \"" + kind + "\"");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw ConfigError("", source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                              ": JSON syntax error: " + e.what());
  }
  check_keys(root, {"task", "epsilon", "delta", "seed", "mode", "trials", "max_qubits", "allow_clamp", "phase_error",
                    "observables", "state", "correlation", "fixture", "cost", "benchmark"},
             "");
  RunConfig cfg;
  cfg.source = source;
  const auto task = as_string(require(root, "task", ""), "task");
  if (task == "estimate") cfg.task = Task::estimate;
  else if (task == "correlate") cfg.task = Task::correlate;
  else if (task == "fixture") cfg.task = Task::fixture;
  else if (task == "cost") cfg.task = Task::cost;
  else if (task == "benchmark") cfg.task = Task::benchmark;
  else throw ConfigError("task", "expected estimate, correlate, fixture, cost or benchmark, got \"" + task + "\"");

  if (auto v = opt_number(root, "epsilon", "")) cfg.options.epsilon = *v;
  if (auto v = opt_number(root, "delta", "")) cfg.options.delta = *v;
  if (auto v = opt_number(root, "phase_error", "")) cfg.options.phase_error = *v;
  if (root.contains("seed")) cfg.seed = as_u64(root["seed"], "seed");
  if (root.contains("trials")) cfg.trials = as_int(root["trials"], "trials");
  if (root.contains("max_qubits")) cfg.options.max_qubits = as_int(root["max_qubits"], "max_qubits");
  if (root.contains("allow_clamp")) cfg.options.allow_clamp = as_bool(root["allow_clamp"], "allow_clamp");
  if (root.contains("mode")) {
    const auto mode = as_string(root["mode"], "mode");
    if (mode == "analytic") cfg.options.mode = OracleMode::analytic;
    else if (mode == "circuit") cfg.options.mode = OracleMode::circuit;
    else throw ConfigError("mode", "expected \"analytic\" or \"circuit\"");
  }
  if (root.contains("observables")) cfg.observables = parse_observables(root["observables"], "observables");
  if (root.contains("state")) cfg.state = parse_state(root["state"], "state");
  if (root.contains("correlation")) cfg.correlation = parse_correlation(root["correlation"], "correlation");
  if (root.contains("fixture")) cfg.fixture = parse_fixture(root["fixture"], "fixture");
  if (root.contains("cost")) {
    const auto& c = root["cost"];
    check_keys(c, {"scenarios", "csv"}, "cost");
    const auto& list = require(c, "scenarios", "cost");
    if (!list.is_array() || list.empty()) throw ConfigError("cost.scenarios", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto p = index("cost.scenarios", i);
      const auto name = as_string(require(list[i], "scenario", p), join(p, "scenario"));
      const auto scenario = wrap(join(p, "scenario"), [&] { return parse_cost_scenario(name); });
      cfg.costs.emplace_back(scenario, parse_cost_params(list[i], p));
    }
    if (c.contains("csv")) cfg.csv_path = as_string(c["csv"], "cost.csv");
  }
  if (root.contains("benchmark")) {
    const auto& b = root["benchmark"];
    check_keys(b, {"budgets", "sampling_trials"}, "benchmark");
    if (b.contains("budgets")) {
      const auto& arr = b["budgets"];
      if (!arr.is_array() || arr.size() < 2) throw ConfigError("benchmark.budgets", "expected at least two budgets");
      cfg.benchmark.budgets.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        cfg.benchmark.budgets.push_back(as_u64(arr[i], index("benchmark.budgets", i)));
      }
    }
    if (b.contains("sampling_trials")) {
      cfg.benchmark.sampling_trials = as_int(b["sampling_trials"], "benchmark.sampling_trials");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.options.epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  if (!(cfg.options.delta > 0.0 && cfg.options.delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  if (!(cfg.options.phase_error >= 0.0 && cfg.options.phase_error < 1.0 / 3.0)) {
    throw ConfigError("phase_error", "must lie in [0, 1/3)");
  }
  if (cfg.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (cfg.options.max_qubits < 2 || cfg.options.max_qubits > 30) throw ConfigError("max_qubits", "must lie in [2, 30]");
  const auto need_state = [&](const char* what) {
    if (!cfg.state) throw ConfigError("state", std::string("required for the ") + what + " task");
  };
  switch (cfg.task) {
    case Task::estimate:
    case Task::benchmark:
      if (!cfg.observables) throw ConfigError("observables", "required for the " + to_string(cfg.task) + " task");
      need_state(to_string(cfg.task).c_str());
      if (cfg.state->num_qubits() != cfg.observables->num_qubits()) {
        throw ConfigError("state", "acts on " + std::to_string(cfg.state->num_qubits()) +
                                       " qubits but the observables act on " +
                                       std::to_string(cfg.observables->num_qubits()));
      }
      if (cfg.task == Task::benchmark) {
        if (cfg.trials < 30) throw ConfigError("trials", "benchmark needs at least 30 trials");
        if (cfg.benchmark.sampling_trials < 30) throw ConfigError("benchmark.sampling_trials", "must be >= 30");
      }
      break;
    case Task::correlate:
      if (!cfg.correlation) throw ConfigError("correlation", "required for the correlate task");
      need_state("correlate");
      if (cfg.state->num_qubits() != cfg.correlation->hamiltonian.num_qubits()) {
        throw ConfigError("state", "width differs from the correlation operators");
      }
      break;
    case Task::fixture:
      if (!cfg.fixture) throw ConfigError("fixture", "required for the fixture task");
      break;
    case Task::cost:
      if (cfg.costs.empty()) throw ConfigError("cost", "required for the cost task");
      break;
  }
}

}  // namespace gradeval::cli
