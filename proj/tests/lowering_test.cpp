#include <gtest/gtest.h>

#include <variant>

#include "magicsim/angle.h"
#include "magicsim/errors.h"
#include "magicsim/lowering.h"
#include "magicsim/qasm.h"

using namespace magicsim;

namespace {

int injections(const CircuitDag& dag) {
  int n = 0;
  for (const GateNode& g : dag.nodes()) {
    n += is_injection(g.kind) ? 1 : 0;
  }
  return n;
}

}  // namespace

TEST(Lowering, AngleExpressions) {
  EXPECT_NEAR(evaluate_angle_expression("pi/2"), kPi / 2, 1e-12);
  EXPECT_NEAR(evaluate_angle_expression("-(1+2)*3/4"), -2.25, 1e-12);
  const std::vector<double> params{0.5, 1.5};
  EXPECT_NEAR(evaluate_angle_expression("p1 - p0*2", params), 0.5, 1e-12);
  EXPECT_NEAR(evaluate_angle_expression("2e-1 + pi"), 0.2 + kPi, 1e-12);
  EXPECT_THROW(evaluate_angle_expression("p3", params), InputError);
  EXPECT_THROW(evaluate_angle_expression("1 +"), InputError);
  EXPECT_THROW(evaluate_angle_expression("foo"), InputError);
}

TEST(Lowering, CoreKinds) {
  const std::vector<double> none;
  EXPECT_TRUE(std::holds_alternative<gate::TInjection>(*core_gate_kind("t", none)));
  EXPECT_TRUE(std::get<gate::TInjection>(*core_gate_kind("tdg", none)).dagger);
  const std::vector<double> quarter{kPi / 2};
  EXPECT_TRUE(std::holds_alternative<gate::Clifford>(*core_gate_kind("rz", quarter)));
  const std::vector<double> small{0.3};
  EXPECT_TRUE(std::holds_alternative<gate::RzInjection>(*core_gate_kind("rz", small)));
  EXPECT_FALSE(core_gate_kind("ccx", none).has_value());
  EXPECT_EQ(core_gate_arity("cx"), 2);
  EXPECT_EQ(core_gate_arity("h"), 1);
  EXPECT_FALSE(core_gate_arity("ccx").has_value());
}

TEST(Lowering, BuiltinEntries) {
  const auto& table = DecompositionTable::builtin();
  for (const char* name : {"ccx", "swap", "u1", "u2", "u3", "rx", "ry", "cy"}) {
    EXPECT_TRUE(table.contains(name)) << name;
  }
  EXPECT_EQ(table.steps("ccx").size(), 15u);
}

TEST(Lowering, U1OfCliffordAngleHasNoInjection) {
  CircuitDag dag(1);
  const std::vector<double> half{kPi / 2};
  append_lowered(dag, "u1", half, {0}, DecompositionTable::builtin());
  EXPECT_EQ(injections(dag), 0);
  const std::vector<double> eighth{kPi / 8};
  append_lowered(dag, "u1", eighth, {0}, DecompositionTable::builtin());
  EXPECT_EQ(injections(dag), 1);
}

TEST(Lowering, CustomTableOverridesAndRecurses) {
  const auto custom = DecompositionTable::from_json(nlohmann::json::parse(R"({
    "ccx": [ {"name": "t", "qubit_pattern": [2]} ],
    "twot": [ {"name": "ccx", "qubit_pattern": [0, 1, 2]}, {"name": "t", "qubit_pattern": [0]} ]
  })"));
  const auto table = DecompositionTable::builtin().merged_with(custom);
  EXPECT_EQ(table.steps("ccx").size(), 1u);
  EXPECT_TRUE(table.contains("swap"));
  CircuitDag dag(3);
  append_lowered(dag, "twot", {}, {0, 1, 2}, table);
  EXPECT_EQ(dag.size(), 2u);
  EXPECT_EQ(dag.node(0).qubits, std::vector<int>{2});
}

TEST(Lowering, TableRoundTripsThroughJson) {
  const auto& table = DecompositionTable::builtin();
  const auto again = DecompositionTable::from_json(table.to_json());
  EXPECT_EQ(again.to_json(), table.to_json());
}

TEST(Lowering, BadTablesRejected) {
  EXPECT_THROW(DecompositionTable::from_json(nlohmann::json::parse("[]")), ConfigError);
  EXPECT_THROW(DecompositionTable::from_json(nlohmann::json::parse(R"({"g": {}})")), ConfigError);
  EXPECT_THROW(DecompositionTable::from_json(nlohmann::json::parse(R"({"g": [{"qubit_pattern": [0]}]})")),
               ConfigError);
  EXPECT_THROW(DecompositionTable::from_json(
                   nlohmann::json::parse(R"({"g": [{"name": "h", "qubit_pattern": [0], "x": 1}]})")),
               ConfigError);
  EXPECT_THROW(DecompositionTable::from_json(nlohmann::json::parse(R"({"g": [{"name": "g", "qubit_pattern": [0]}]})")),
               ConfigError);
}

TEST(Lowering, UnknownGateIsInputError) {
  CircuitDag dag(1);
  EXPECT_THROW(append_lowered(dag, "nope", {}, {0}, DecompositionTable::builtin()), InputError);
}

TEST(Lowering, LowerGatesExpandsComposites) {
  const CircuitDag raw = parse_qasm_raw("OPENQASM 2.0;\nqreg q[3];\nccx q[0],q[1],q[2];\nt q[0];\n");
  EXPECT_EQ(raw.size(), 2u);
  const CircuitDag low = lower_gates(raw);
  EXPECT_EQ(low.size(), 16u);
  EXPECT_EQ(injections(low), 8);
  EXPECT_TRUE(low.is_acyclic());
}

TEST(Lowering, ExpandRzReplacesEachRotation) {
  CircuitDag dag(2);
  dag.append(gate::RzInjection{0.3}, {0}, 1);
  dag.append(gate::Clifford{"cx"}, {0, 1}, 1);
  dag.append(gate::RzInjection{0.7}, {1}, 1);
  const CircuitDag x = expand_rz(dag, 3);
  EXPECT_EQ(x.size(), 7u);
  int t = 0;
  for (const GateNode& g : x.nodes()) {
    EXPECT_FALSE(std::holds_alternative<gate::RzInjection>(g.kind));
    t += std::holds_alternative<gate::TInjection>(g.kind) ? 1 : 0;
  }
  EXPECT_EQ(t, 6);
  EXPECT_THROW(expand_rz(dag, 0), ConfigError);
}
