#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "magicsim/circuit.h"
#include "magicsim/lowering.h"

namespace magicsim {

// A single gate application after register broadcast and flattening of all
// qreg declarations into one index space.
struct GateCall {
  std::string name;
  std::vector<double> params;
  std::vector<int> qubits;
  int line = 0;
  int column = 0;
};

struct QasmProgram {
  int qubit_count = 0;
  std::vector<GateCall> calls;
};

/*
 * OpenQASM 2.0 subset reader.
 *
 * Accepts the OPENQASM header, include, qreg, creg (as measurement targets
 * only), gate applications with angle expressions, measure and barrier.
 * Classical control (if), gate/opaque definitions and reset are rejected.
 * All errors are ParseError with the offending line and column.
 */
QasmProgram parse_qasm_program(std::string_view text);

// DAG without lowering: gates outside the core set stay Composite nodes.
CircuitDag parse_qasm_raw(std::string_view text);

// Parses and lowers through `table`; every node has a core kind.
CircuitDag parse_qasm(std::string_view text,
                      const DecompositionTable& table = DecompositionTable::builtin());

CircuitDag load_qasm_file(const std::string& path,
                          const DecompositionTable& table = DecompositionTable::builtin());

}  // namespace magicsim
