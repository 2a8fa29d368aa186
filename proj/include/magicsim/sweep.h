#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "magicsim/circuit.h"
#include "magicsim/json_io.h"
#include "magicsim/scheduler.h"

namespace magicsim {

// ceil(gamma * t_prod), for gamma >= 0 and t_prod >= 1.
int f_naive(double gamma, double t_prod);

// The per-trial numbers a sweep keeps (traces are dropped).
struct TrialSummary {
  double cycles = 0.0;
  double volume = 0.0;
  double peak_demand = 0.0;
  double fixups = 0.0;
  double stalls = 0.0;
  double injections = 0.0;
  double aborts = 0.0;
};

TrialSummary summarize(const SimResult& r);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation
  double min = 0.0;
  double max = 0.0;
};

struct TrialAggregate {
  std::size_t count = 0;
  // One trial only: stddev is reported as 0.
  bool single_sample = false;
  MetricSummary cycles;
  MetricSummary volume;
  MetricSummary peak_demand;
  MetricSummary fixups;
  MetricSummary stalls;
  MetricSummary injections;
  MetricSummary aborts;
};

// Throws InputError on an empty list.
TrialAggregate aggregate_trials(std::span<const SimResult> results);
TrialAggregate aggregate_summaries(std::span<const TrialSummary> trials);

// Seed of trial `trial` at F; independent of which other cells exist.
std::uint64_t sweep_trial_seed(std::uint64_t base_seed, int F, int trial);

// Runs fn(0..n-1) on `threads` workers. Each index runs exactly once; if any
// call throws, the exception of the smallest failing index is rethrown after
// all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct SweepRow {
  int F = 0;
  SimulationMode mode = SimulationMode::D;
  TrialAggregate stats;
};

struct SweepOptions {
  SimConfig base;  // F and trial_seed are set per cell
  int f_min = 1;
  int f_max = 1;
  int trials = 100;
  std::uint64_t base_seed = 0;
  double epsilon = 0.01;
  int threads = 1;
};

struct SweepResult {
  Mechanism mechanism = Mechanism::distillation;
  SimulationMode mode = SimulationMode::D;
  std::vector<SweepRow> rows;                // requested mode
  std::vector<SweepRow> deterministic_rows;  // Mode A at the same F values
  int F_star = 0;
  int F_plateau = 0;
  int F_det = 0;       // plateau of the Mode A curve
  int F_star_det = 0;  // volume minimum of the Mode A curve
  int F_naive_peak = 0;
  int F_naive_avg = 0;
  Cycle static_cycles = 0;
  // F values where mean C rose by more than 2% over the previous F.
  std::vector<int> non_monotone_F;
  int trials = 0;
  std::uint64_t base_seed = 0;
  double epsilon = 0.0;
};

// Smallest index whose value is within (1 + eps) of the last value.
std::size_t plateau_index(std::span<const double> mean_cycles, double eps);
// Index of the smallest value, first one on ties.
std::size_t argmin_index(std::span<const double> values);

SweepResult sweep_factories(const CircuitDag& dag, const SweepOptions& opts);

// Columns: mechanism, mode, F, trials, mean_C, std_C, mean_V, std_V,
// mean_peak_demand, mean_fixups, mean_stalls. Requested-mode rows first, then
// the Mode A reference rows when the requested mode is not A.
std::string sweep_csv(const SweepResult& result);
Json sweep_summary_json(const SweepResult& result);

// Mechanism config re-derived for physical error rate p and code distance d:
// failure probabilities go back to their p- and d-dependent defaults.
// Distillation, which has no distance field, scales t_prod and the physical
// factory cost with d / 7.
MechanismConfig derive_mechanism(const MechanismConfig& base, double p, int d, CostUnits units);

struct SensitivityOptions {
  SimConfig base;
  std::vector<double> per_list;
  std::vector<int> distance_list;
  std::vector<int> f_list;
  int trials = 100;
  std::uint64_t base_seed = 0;
  int threads = 1;
};

struct SensitivityCell {
  double p = 0.0;
  int d = 0;
  int F = 0;
  TrialAggregate stats;
};

std::vector<SensitivityCell> sensitivity_grid(const CircuitDag& dag, const SensitivityOptions& opts);

// Columns: p, d, F, mean_V, std_V.
std::string sensitivity_csv(const std::vector<SensitivityCell>& cells);

}  // namespace magicsim
