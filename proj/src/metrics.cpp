#include "magicsim/metrics.h"

#include <algorithm>
#include <numeric>

#include "magicsim/errors.h"

namespace magicsim {

CostModel CostModel::preset(const MechanismConfig& cfg, CostUnits units,
                            std::optional<double> logical_override) {
  CostModel cm;
  cm.unit_mode = units;
  const double d = data_code_distance(cfg);
  cm.cost_per_logical_qubit =
      logical_override.value_or(units == CostUnits::physical ? 2.0 * d * d : 1.0);
  cm.cost_per_production_unit = production_unit_cost(cfg, units);
  return cm;
}

double q_total(std::int64_t logical_qubits, int F, const CostModel& cm) {
  return static_cast<double>(logical_qubits) * cm.cost_per_logical_qubit +
         static_cast<double>(F) * cm.cost_per_production_unit;
}

double space_time_volume(Cycle cycles, double q) { return q * static_cast<double>(cycles); }

double overhead_ratio(Cycle cycles, Cycle static_cycles) {
  if (static_cycles <= 0) {
    throw InputError("overhead ratio needs a positive static cycle count");
  }
  return static_cast<double>(cycles) / static_cast<double>(static_cycles);
}

DemandStats demand_stats(const std::vector<int>& trace) {
  if (trace.empty()) {
    throw InputError("demand statistics of an empty trace");
  }
  DemandStats s;
  s.peak = *std::max_element(trace.begin(), trace.end());
  s.mean = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(trace.size());
  return s;
}

double peak_reduction(int deterministic_peak, int stochastic_peak) {
  if (deterministic_peak <= 0) {
    throw InputError("peak reduction needs a positive deterministic peak");
  }
  return static_cast<double>(deterministic_peak - stochastic_peak) / deterministic_peak;
}

StructuralPredictors structural_predictors(const CircuitDag& dag, const StaticProfile& profile) {
  if (dag.empty()) {
    throw InputError("structural predictors of an empty circuit");
  }
  return StructuralPredictors{profile.critical_path_ncd,
                              Burstiness{profile.peak_to_mean, profile.demand_cv}};
}

}  // namespace magicsim
