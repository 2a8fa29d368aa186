#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "magicsim/circuit.h"
#include "magicsim/production.h"
#include "magicsim/rng.h"

namespace magicsim {

// A: no errors. B: stochastic production. C: injection failures. D: both.
enum class SimulationMode { A, B, C, D };

std::string to_string(SimulationMode m);
SimulationMode parse_mode(const std::string& name);
bool production_is_stochastic(SimulationMode m);
bool injection_can_fail(SimulationMode m);

enum class PriorityUpdate { fixed, full };

std::string to_string(PriorityUpdate p);  // "static" | "full"
PriorityUpdate parse_priority_update(const std::string& name);

struct SimConfig {
  MechanismConfig mechanism = DistillationConfig{};
  int F = 1;
  SimulationMode mode = SimulationMode::D;
  // 0: each non-Clifford rz consumes one state (as-one-state). n >= 1: each rz
  // becomes n serial T gates before scheduling. Rz synthesis requires 0.
  int rz_expand = 0;
  PriorityUpdate priority_update = PriorityUpdate::full;
  std::uint64_t trial_seed = 0;
  Cycle max_cycles = 100'000'000;
  int handoff_latency = 1;
  int fixup_duration = 1;
  // Per-kind duration overrides; keys: clifford, t, tdg, rz, measure.
  std::map<std::string, int> durations;
  CostUnits cost_units = CostUnits::logical_tiles;
  std::optional<double> cost_per_logical_qubit;  // unset: preset
  // Grant every request once the minimum production latency has passed.
  // Used for the resource-unconstrained reference run.
  bool unlimited_supply = false;
  // Run conservation, exclusivity and acyclicity checks during the run.
  bool check_invariants = false;
};

std::string rz_handling_name(int rz_expand);  // "as-one-state" | "expand:n"
int parse_rz_handling(const std::string& text);

// Throws ConfigError for invalid combinations.
void validate(const SimConfig& cfg);

struct SimResult {
  Cycle cycles = 0;
  double q_total = 0.0;
  double volume = 0.0;
  std::vector<int> demand_trace;  // states consumed in cycle c+1
  std::vector<int> stall_trace;   // unmet requests in cycle c+1
  std::int64_t fixup_count = 0;
  std::int64_t injection_count = 0;
  std::int64_t abort_count = 0;
  std::int64_t stall_count = 0;
  int max_concurrent_rz_units = 0;
  int peak_demand = 0;
  std::uint64_t trial_seed = 0;
  std::int64_t node_count = 0;  // including inserted fixups
  std::int64_t invariant_checks = 0;
};

// Outcome of one injection in a mode with injection errors: fair coin from
// the node's own stream. True is success.
bool sample_injection(std::uint64_t trial_seed, NodeId node);

// Fixup applied after a failed injection of `kind`: the Clifford correction,
// or for a non-Clifford rz under Rz synthesis the rz at the doubled angle.
GateKind fixup_kind(const GateKind& kind, bool rz_mechanism);

// Splices the fixup behind `after` and updates priorities; returns its id.
NodeId insert_fixup(CircuitDag& dag, NodeId after, GateKind kind, int duration,
                    PriorityUpdate update);

SimResult simulate(const CircuitDag& dag, const SimConfig& cfg);

// Mode A cycle count with unconstrained supply (first-state latency included).
Cycle static_cycle_count(const CircuitDag& dag, const SimConfig& cfg);

const std::vector<int>& demand_trace(const SimResult& result);

// Rows "cycle,consumed,stalled" with a header, cycles starting at 1.
std::string trace_csv(const SimResult& result);

// Applies rz_expand and duration overrides; what simulate() actually runs.
CircuitDag prepare_circuit(const CircuitDag& dag, const SimConfig& cfg);

}  // namespace magicsim
