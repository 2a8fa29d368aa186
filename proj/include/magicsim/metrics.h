#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "magicsim/circuit.h"
#include "magicsim/production.h"
#include "magicsim/profile.h"

namespace magicsim {

struct CostModel {
  CostUnits unit_mode = CostUnits::logical_tiles;
  double cost_per_logical_qubit = 1.0;
  double cost_per_production_unit = 11.0;

  // Preset costs for a mechanism; a config's own cost field wins, as does
  // logical_override.
  static CostModel preset(const MechanismConfig& cfg, CostUnits units,
                          std::optional<double> logical_override = std::nullopt);
};

double q_total(std::int64_t logical_qubits, int F, const CostModel& cm);

double space_time_volume(Cycle cycles, double q);

// C / C_static. Throws InputError when C_static is 0.
double overhead_ratio(Cycle cycles, Cycle static_cycles);

struct DemandStats {
  int peak = 0;
  double mean = 0.0;
};

// Throws InputError on an empty trace.
DemandStats demand_stats(const std::vector<int>& trace);

// (peak_det - peak_stoch) / peak_det. Throws InputError when peak_det is 0.
double peak_reduction(int deterministic_peak, int stochastic_peak);

struct Burstiness {
  double peak_to_mean = 0.0;
  double cv = 0.0;
};

struct StructuralPredictors {
  double critical_path_ncd = 0.0;
  Burstiness burstiness;
};

// Throws InputError for an empty circuit.
StructuralPredictors structural_predictors(const CircuitDag& dag, const StaticProfile& profile);

}  // namespace magicsim
