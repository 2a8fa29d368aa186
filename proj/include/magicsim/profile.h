#pragma once

#include <cstdint>
#include <vector>

#include "magicsim/circuit.h"

namespace magicsim {

/*
 * Deterministic demand profile of a circuit.
 *
 * Layers come from ASAP scheduling with unlimited resources: a node starts at
 * the latest (start + duration) over its predecessors, and layer k is cycle k
 * of that schedule. per_layer_demand has one entry per cycle of the weighted
 * depth, so idle cycles count toward gamma_avg.
 */
struct StaticProfile {
  std::vector<int> per_layer_demand;
  int gamma_peak = 0;
  double gamma_avg = 0.0;
  std::int64_t t_count = 0;
  std::int64_t rz_count = 0;
  std::int64_t depth_cycles = 0;
  double critical_path_ncd = 0.0;
  double peak_to_mean = 0.0;
  double demand_cv = 0.0;
};

// priority[id] = duration(id) + max over successors; throws InvariantViolation
// on a cycle.
std::vector<std::int64_t> longest_path_priorities(const CircuitDag& dag);

// Writes longest_path_priorities into each node's priority field.
void assign_priorities(CircuitDag& dag);

// ASAP start cycle (0-based) for every node.
std::vector<std::int64_t> asap_start_cycles(const CircuitDag& dag);

// One maximal-length path: start from the highest-priority source and keep
// taking the critical successor, ties to the smallest id. Zero-duration nodes
// are skipped in the result.
std::vector<NodeId> critical_path(const CircuitDag& dag);

StaticProfile static_profile(const CircuitDag& dag);

}  // namespace magicsim
