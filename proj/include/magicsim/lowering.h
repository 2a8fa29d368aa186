#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "magicsim/circuit.h"

namespace magicsim {

// One gate of a decomposition. qubit_pattern indexes the operands of the gate
// being decomposed; angle_expr may reference its parameters as p0, p1, ...
struct DecompositionStep {
  std::string name;
  std::vector<int> qubit_pattern;
  std::optional<std::string> angle_expr;
};

/*
 * Gate-name -> gate-sequence rewrite rules. Steps may name core gates or other
 * table entries; expansion recurses. JSON form:
 *
 *   { "ccx": [ {"name": "h", "qubit_pattern": [2]}, ... ],
 *     "u1":  [ {"name": "rz", "qubit_pattern": [0], "angle_expr": "p0"} ] }
 */
class DecompositionTable {
 public:
  // ccx (7-T), swap (3 cx), u1, u2, u3, u, rx, ry, cy.
  static const DecompositionTable& builtin();

  static DecompositionTable from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  // Entries of `overrides` replace same-named entries here.
  DecompositionTable merged_with(const DecompositionTable& overrides) const;

  bool contains(const std::string& name) const { return rules_.count(name) != 0; }
  const std::vector<DecompositionStep>& steps(const std::string& name) const;
  void set(const std::string& name, std::vector<DecompositionStep> steps);
  std::size_t size() const { return rules_.size(); }

 private:
  std::map<std::string, std::vector<DecompositionStep>> rules_;
};

// Maps a core gate (x y z h s sdg t tdg cx cz id rz measure barrier) to its
// GateKind. rz with a Clifford-equivalent angle becomes a Clifford. Returns
// nullopt for names that need a decomposition.
std::optional<GateKind> core_gate_kind(const std::string& name, std::span<const double> params);

// Expected operand count for core gates, or nullopt.
std::optional<int> core_gate_arity(const std::string& name);

// Evaluates an angle expression (numbers, pi, p<i>, + - * /, parentheses).
double evaluate_angle_expression(std::string_view text, std::span<const double> params = {});

// Appends `name(params) qubits` to `dag`, expanding through `table` until only
// core kinds remain. Throws InputError for names with no rule.
void append_lowered(CircuitDag& dag, const std::string& name, std::span<const double> params,
                    const std::vector<int>& qubits, const DecompositionTable& table);

// Rebuilds `dag` with every Composite node expanded. Ids are reassigned in
// dependency order (source order for parsed circuits).
CircuitDag lower_gates(const CircuitDag& dag,
                       const DecompositionTable& table = DecompositionTable::builtin());

// Replaces every RzInjection with `t_per_rz` serial T injections.
CircuitDag expand_rz(const CircuitDag& dag, int t_per_rz);

}  // namespace magicsim
