#pragma once

#include <cstdint>
#include <vector>

#include "generators.h"

namespace magicsim::testing {

struct OracleConfig {
  int F = 1;
  int t_prod = 18;
  bool stagger = true;
  int handoff = 1;
};

struct OracleResult {
  std::int64_t cycles = 0;
  std::vector<std::int64_t> start;  // per gate, 1-based cycle
};

// Brute-force reference for deterministic distillation supply with no
// injection errors. It jumps between event times instead of stepping every
// cycle, derives dependencies from qubit overlap in program order, and gets
// priorities by enumerating every path.
OracleResult oracle_simulate(const std::vector<PlainGate>& gates, const OracleConfig& cfg);

// Longest path (in cycles) from each gate to a sink, by exhaustive search.
std::vector<std::int64_t> oracle_priorities(const std::vector<PlainGate>& gates);

}  // namespace magicsim::testing
