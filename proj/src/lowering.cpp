#include "magicsim/lowering.h"

#include <algorithm>

#include "expr.h"
#include "lexer.h"
#include "magicsim/angle.h"
#include "magicsim/errors.h"

namespace magicsim {

namespace {

constexpr int kMaxExpansionDepth = 32;

// Time order, operands (a, b, c) = (0, 1, 2).
constexpr const char* kBuiltinTable = R"({
  "ccx": [
    {"name": "h",   "qubit_pattern": [2]},
    {"name": "cx",  "qubit_pattern": [1, 2]},
    {"name": "tdg", "qubit_pattern": [2]},
    {"name": "cx",  "qubit_pattern": [0, 2]},
    {"name": "t",   "qubit_pattern": [2]},
    {"name": "cx",  "qubit_pattern": [1, 2]},
    {"name": "tdg", "qubit_pattern": [2]},
    {"name": "cx",  "qubit_pattern": [0, 2]},
    {"name": "t",   "qubit_pattern": [1]},
    {"name": "t",   "qubit_pattern": [2]},
    {"name": "h",   "qubit_pattern": [2]},
    {"name": "cx",  "qubit_pattern": [0, 1]},
    {"name": "t",   "qubit_pattern": [0]},
    {"name": "tdg", "qubit_pattern": [1]},
    {"name": "cx",  "qubit_pattern": [0, 1]}
  ],
  "swap": [
    {"name": "cx", "qubit_pattern": [0, 1]},
    {"name": "cx", "qubit_pattern": [1, 0]},
    {"name": "cx", "qubit_pattern": [0, 1]}
  ],
  "u1": [
    {"name": "rz", "qubit_pattern": [0], "angle_expr": "p0"}
  ],
  "u2": [
    {"name": "rz", "qubit_pattern": [0], "angle_expr": "p1 - pi/2"},
    {"name": "h",  "qubit_pattern": [0]},
    {"name": "s",  "qubit_pattern": [0]},
    {"name": "h",  "qubit_pattern": [0]},
    {"name": "rz", "qubit_pattern": [0], "angle_expr": "p0 + pi/2"}
  ],
  "u3": [
    {"name": "rz", "qubit_pattern": [0], "angle_expr": "p2 - pi/2"},
    {"name": "h",  "qubit_pattern": [0]},
    {"name": "rz", "qubit_pattern": [0], "angle_expr": "p0"},
    {"name": "h",  "qubit_pattern": [0]},
    {"name": "rz", "qubit_pattern": [0], "angle_expr": "p1 + pi/2"}
  ],
  "rx": [
    {"name": "h",  "qubit_pattern": [0]},
    {"name": "rz", "qubit_pattern": [0], "angle_expr": "p0"},
    {"name": "h",  "qubit_pattern": [0]}
  ],
  "ry": [
    {"name": "sdg", "qubit_pattern": [0]},
    {"name": "h",   "qubit_pattern": [0]},
    {"name": "rz",  "qubit_pattern": [0], "angle_expr": "p0"},
    {"name": "h",   "qubit_pattern": [0]},
    {"name": "s",   "qubit_pattern": [0]}
  ],
  "cy": [
    {"name": "sdg", "qubit_pattern": [1]},
    {"name": "cx",  "qubit_pattern": [0, 1]},
    {"name": "s",   "qubit_pattern": [1]}
  ]
})";

bool is_named(const std::string& name, std::initializer_list<const char*> names) {
  return std::any_of(names.begin(), names.end(), [&](const char* n) { return name == n; });
}

void append_lowered_impl(CircuitDag& dag, const std::string& name, std::span<const double> params,
                         const std::vector<int>& qubits, const DecompositionTable& table,
                         int depth) {
  if (auto kind = core_gate_kind(name, params)) {
    const auto arity = core_gate_arity(name);
    if (arity && static_cast<std::size_t>(*arity) != qubits.size()) {
      throw InputError("gate '" + name + "' expects " + std::to_string(*arity) + " qubit(s), got " +
                       std::to_string(qubits.size()));
    }
    const int duration = std::holds_alternative<gate::Barrier>(*kind) ? 0 : 1;
    dag.append(std::move(*kind), qubits, duration);
    return;
  }
  if (!table.contains(name)) {
    throw InputError("unsupported gate '" + name + "' (no decomposition entry)");
  }
  if (depth >= kMaxExpansionDepth) {
    throw InputError("decomposition of '" + name + "' recurses too deeply");
  }
  // Duplicate operands are rejected before expanding so that e.g. ccx on a
  // repeated qubit fails on the ccx itself.
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (qubits[i] == qubits[j]) {
        throw InputError("duplicate qubit operand " + std::to_string(qubits[i]) + " in " + name);
      }
    }
  }
  for (const DecompositionStep& step : table.steps(name)) {
    std::vector<int> step_qubits;
    step_qubits.reserve(step.qubit_pattern.size());
    for (int operand : step.qubit_pattern) {
      if (operand < 0 || static_cast<std::size_t>(operand) >= qubits.size()) {
        throw InputError("decomposition of '" + name + "' references operand " +
                         std::to_string(operand) + " but the gate has " +
                         std::to_string(qubits.size()));
      }
      step_qubits.push_back(qubits[static_cast<std::size_t>(operand)]);
    }
    std::vector<double> step_params;
    if (step.angle_expr) {
      step_params.push_back(evaluate_angle_expression(*step.angle_expr, params));
    }
    append_lowered_impl(dag, step.name, step_params, step_qubits, table, depth + 1);
  }
}

}  // namespace

std::optional<int> core_gate_arity(const std::string& name) {
  if (is_named(name, {"x", "y", "z", "h", "s", "sdg", "t", "tdg", "rz", "id", "measure"})) {
    return 1;
  }
  if (is_named(name, {"cx", "cz"})) {
    return 2;
  }
  return std::nullopt;
}

std::optional<GateKind> core_gate_kind(const std::string& name, std::span<const double> params) {
  auto expect_params = [&](std::size_t n) {
    if (params.size() != n) {
      throw InputError("gate '" + name + "' expects " + std::to_string(n) + " parameter(s), got " +
                       std::to_string(params.size()));
    }
  };
  if (is_named(name, {"x", "y", "z", "h", "s", "sdg", "cx", "cz", "id"})) {
    expect_params(0);
    return gate::Clifford{name};
  }
  if (name == "t" || name == "tdg") {
    expect_params(0);
    return gate::TInjection{name == "tdg"};
  }
  if (name == "rz") {
    expect_params(1);
    const double angle = canonicalize_angle(params[0]);
    if (const int quarters = clifford_quarter_turns(angle); quarters >= 0) {
      return gate::Clifford{clifford_rotation_name(quarters)};
    }
    return gate::RzInjection{angle};
  }
  if (name == "measure") {
    expect_params(0);
    return gate::Measure{};
  }
  if (name == "barrier") {
    expect_params(0);
    return gate::Barrier{};
  }
  return std::nullopt;
}

double evaluate_angle_expression(std::string_view text, std::span<const double> params) {
  const auto tokens = detail::tokenize(text);
  std::size_t pos = 0;
  const double value = detail::parse_expression(tokens, pos, params);
  if (tokens[pos].type != detail::TokenType::end) {
    throw ParseError("trailing input '" + tokens[pos].text + "' in angle expression",
                     tokens[pos].line, tokens[pos].column);
  }
  return value;
}

const DecompositionTable& DecompositionTable::builtin() {
  static const DecompositionTable table = from_json(nlohmann::json::parse(kBuiltinTable));
  return table;
}

DecompositionTable DecompositionTable::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("decomposition table must be a JSON object");
  }
  DecompositionTable table;
  for (const auto& [gate_name, seq] : doc.items()) {
    if (!seq.is_array()) {
      throw ConfigError("decomposition for '" + gate_name + "' must be an array");
    }
    std::vector<DecompositionStep> steps;
    for (const auto& entry : seq) {
      if (!entry.is_object()) {
        throw ConfigError("decomposition step for '" + gate_name + "' must be an object");
      }
      DecompositionStep step;
      for (const auto& [key, value] : entry.items()) {
        if (key == "name") {
          step.name = value.get<std::string>();
        } else if (key == "qubit_pattern") {
          step.qubit_pattern = value.get<std::vector<int>>();
        } else if (key == "angle_expr") {
          step.angle_expr = value.get<std::string>();
        } else {
          throw ConfigError("unknown field '" + key + "' in decomposition for '" + gate_name + "'");
        }
      }
      if (step.name.empty()) {
        throw ConfigError("decomposition step for '" + gate_name + "' is missing 'name'");
      }
      if (step.name == gate_name) {
        throw ConfigError("decomposition for '" + gate_name + "' refers to itself");
      }
      steps.push_back(std::move(step));
    }
    table.rules_[gate_name] = std::move(steps);
  }
  return table;
}

nlohmann::json DecompositionTable::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, steps] : rules_) {
    nlohmann::json seq = nlohmann::json::array();
    for (const auto& step : steps) {
      nlohmann::json entry{{"name", step.name}, {"qubit_pattern", step.qubit_pattern}};
      if (step.angle_expr) {
        entry["angle_expr"] = *step.angle_expr;
      }
      seq.push_back(std::move(entry));
    }
    doc[name] = std::move(seq);
  }
  return doc;
}

DecompositionTable DecompositionTable::merged_with(const DecompositionTable& overrides) const {
  DecompositionTable merged = *this;
  for (const auto& [name, steps] : overrides.rules_) {
    merged.rules_[name] = steps;
  }
  return merged;
}

const std::vector<DecompositionStep>& DecompositionTable::steps(const std::string& name) const {
  const auto it = rules_.find(name);
  if (it == rules_.end()) {
    throw InputError("unsupported gate '" + name + "' (no decomposition entry)");
  }
  return it->second;
}

void DecompositionTable::set(const std::string& name, std::vector<DecompositionStep> steps) {
  rules_[name] = std::move(steps);
}

void append_lowered(CircuitDag& dag, const std::string& name, std::span<const double> params,
                    const std::vector<int>& qubits, const DecompositionTable& table) {
  append_lowered_impl(dag, name, params, qubits, table, 0);
}

CircuitDag lower_gates(const CircuitDag& dag, const DecompositionTable& table) {
  CircuitDag out(dag.qubit_count());
  for (NodeId id : dag.topological_order()) {
    const GateNode& n = dag.node(id);
    if (const auto* composite = std::get_if<gate::Composite>(&n.kind)) {
      append_lowered(out, composite->name, composite->params, n.qubits, table);
    } else {
      out.append(n.kind, n.qubits, n.duration, n.origin);
    }
  }
  return out;
}

CircuitDag expand_rz(const CircuitDag& dag, int t_per_rz) {
  if (t_per_rz < 1) {
    throw ConfigError("rz expansion needs at least one T gate per rotation");
  }
  CircuitDag out(dag.qubit_count());
  for (NodeId id : dag.topological_order()) {
    const GateNode& n = dag.node(id);
    if (std::holds_alternative<gate::RzInjection>(n.kind)) {
      for (int k = 0; k < t_per_rz; ++k) {
        out.append(gate::TInjection{false}, n.qubits, n.duration, n.origin);
      }
    } else {
      out.append(n.kind, n.qubits, n.duration, n.origin);
    }
  }
  return out;
}

}  // namespace magicsim
