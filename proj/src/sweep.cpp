#include "magicsim/sweep.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "magicsim/errors.h"
#include "magicsim/profile.h"

namespace magicsim {

namespace {

// Shortest text that reads back to the same double.
std::string full_precision(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

MetricSummary summarize_metric(std::span<const TrialSummary> trials, double TrialSummary::*field) {
  MetricSummary m;
  const double n = static_cast<double>(trials.size());
  m.min = m.max = trials.front().*field;
  double sum = 0.0;
  for (const TrialSummary& t : trials) {
    sum += t.*field;
    m.min = std::min(m.min, t.*field);
    m.max = std::max(m.max, t.*field);
  }
  m.mean = sum / n;
  if (trials.size() > 1) {
    double ss = 0.0;
    for (const TrialSummary& t : trials) {
      ss += (t.*field - m.mean) * (t.*field - m.mean);
    }
    m.stddev = std::sqrt(ss / (n - 1.0));
  }
  return m;
}

// Runs `trials` seeds at each F value and returns one aggregate per F.
std::vector<TrialAggregate> run_cells(const CircuitDag& dag, const SimConfig& base,
                                      const std::vector<int>& f_values, int trials,
                                      std::uint64_t base_seed, int threads) {
  const std::size_t per_f = static_cast<std::size_t>(trials);
  std::vector<TrialSummary> out(f_values.size() * per_f);
  parallel_for(out.size(), threads, [&](std::size_t cell) {
    const int F = f_values[cell / per_f];
    const int trial = static_cast<int>(cell % per_f);
    SimConfig cfg = base;
    cfg.F = F;
    cfg.trial_seed = sweep_trial_seed(base_seed, F, trial);
    try {
      out[cell] = summarize(simulate(dag, cfg));
    } catch (const SimulationError& e) {
      throw SimulationError("F=" + std::to_string(F) + ", trial " + std::to_string(trial) + ": " +
                            e.what());
    } catch (const InvariantViolation& e) {
      throw InvariantViolation("F=" + std::to_string(F) + ", trial " + std::to_string(trial) +
                               ": " + e.what());
    }
  });
  std::vector<TrialAggregate> aggregates;
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    aggregates.push_back(
        aggregate_summaries(std::span<const TrialSummary>(out).subspan(i * per_f, per_f)));
  }
  return aggregates;
}

std::vector<double> mean_of(const std::vector<SweepRow>& rows, MetricSummary TrialAggregate::*metric) {
  std::vector<double> v;
  for (const SweepRow& r : rows) {
    v.push_back((r.stats.*metric).mean);
  }
  return v;
}

}  // namespace

int f_naive(double gamma, double t_prod) {
  if (!(gamma >= 0.0) || !(t_prod >= 1.0)) {
    throw InputError("f_naive needs gamma >= 0 and t_prod >= 1");
  }
  // Guard against products like 3 * (1/3) * 18 landing just above an integer.
  return static_cast<int>(std::ceil(gamma * t_prod - 1e-9));
}

TrialSummary summarize(const SimResult& r) {
  return TrialSummary{static_cast<double>(r.cycles),         r.volume,
                      static_cast<double>(r.peak_demand),    static_cast<double>(r.fixup_count),
                      static_cast<double>(r.stall_count),    static_cast<double>(r.injection_count),
                      static_cast<double>(r.abort_count)};
}

TrialAggregate aggregate_summaries(std::span<const TrialSummary> trials) {
  if (trials.empty()) {
    throw InputError("cannot aggregate an empty list of trials");
  }
  TrialAggregate a;
  a.count = trials.size();
  a.single_sample = trials.size() == 1;
  a.cycles = summarize_metric(trials, &TrialSummary::cycles);
  a.volume = summarize_metric(trials, &TrialSummary::volume);
  a.peak_demand = summarize_metric(trials, &TrialSummary::peak_demand);
  a.fixups = summarize_metric(trials, &TrialSummary::fixups);
  a.stalls = summarize_metric(trials, &TrialSummary::stalls);
  a.injections = summarize_metric(trials, &TrialSummary::injections);
  a.aborts = summarize_metric(trials, &TrialSummary::aborts);
  return a;
}

TrialAggregate aggregate_trials(std::span<const SimResult> results) {
  std::vector<TrialSummary> trials;
  trials.reserve(results.size());
  for (const SimResult& r : results) {
    trials.push_back(summarize(r));
  }
  return aggregate_summaries(trials);
}

std::uint64_t sweep_trial_seed(std::uint64_t base_seed, int F, int trial) {
  return derive_seed(derive_seed(base_seed, static_cast<std::uint64_t>(F)),
                     static_cast<std::uint64_t>(trial));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1))));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;

  auto work = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop.store(true, std::memory_order_relaxed);
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(work);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

std::size_t plateau_index(std::span<const double> mean_cycles, double eps) {
  if (mean_cycles.empty()) {
    throw InputError("plateau of an empty curve");
  }
  const double limit = (1.0 + eps) * mean_cycles.back();
  for (std::size_t i = 0; i < mean_cycles.size(); ++i) {
    if (mean_cycles[i] <= limit) {
      return i;
    }
  }
  return mean_cycles.size() - 1;
}

std::size_t argmin_index(std::span<const double> values) {
  if (values.empty()) {
    throw InputError("minimum of an empty curve");
  }
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
}

SweepResult sweep_factories(const CircuitDag& dag, const SweepOptions& opts) {
  if (opts.f_min < 0 || opts.f_max < opts.f_min) {
    throw InputError("invalid F range [" + std::to_string(opts.f_min) + ", " +
                     std::to_string(opts.f_max) + "]");
  }
  if (opts.trials < 1) {
    throw InputError("trials must be >= 1");
  }
  if (!(opts.epsilon >= 0.0)) {
    throw InputError("plateau epsilon must be >= 0");
  }
  validate(opts.base);

  SweepResult result;
  result.mechanism = mechanism_of(opts.base.mechanism);
  result.mode = opts.base.mode;
  result.trials = opts.trials;
  result.base_seed = opts.base_seed;
  result.epsilon = opts.epsilon;

  std::vector<int> f_values;
  for (int F = opts.f_min; F <= opts.f_max; ++F) {
    f_values.push_back(F);
  }

  const auto stochastic = run_cells(dag, opts.base, f_values, opts.trials, opts.base_seed,
                                    opts.threads);
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    result.rows.push_back(SweepRow{f_values[i], opts.base.mode, stochastic[i]});
  }

  if (opts.base.mode == SimulationMode::A) {
    result.deterministic_rows = result.rows;
  } else {
    // Mode A draws no random numbers, so one trial per F is exact.
    SimConfig det = opts.base;
    det.mode = SimulationMode::A;
    const auto reference =
        run_cells(dag, det, f_values, 1, opts.base_seed, opts.threads);
    for (std::size_t i = 0; i < f_values.size(); ++i) {
      result.deterministic_rows.push_back(SweepRow{f_values[i], SimulationMode::A, reference[i]});
    }
  }

  const auto mean_c = mean_of(result.rows, &TrialAggregate::cycles);
  const auto mean_v = mean_of(result.rows, &TrialAggregate::volume);
  const auto det_c = mean_of(result.deterministic_rows, &TrialAggregate::cycles);
  const auto det_v = mean_of(result.deterministic_rows, &TrialAggregate::volume);
  result.F_star = f_values[argmin_index(mean_v)];
  result.F_plateau = f_values[plateau_index(mean_c, opts.epsilon)];
  result.F_det = f_values[plateau_index(det_c, opts.epsilon)];
  result.F_star_det = f_values[argmin_index(det_v)];
  for (std::size_t i = 1; i < mean_c.size(); ++i) {
    if (mean_c[i] > 1.02 * mean_c[i - 1]) {
      result.non_monotone_F.push_back(f_values[i]);
    }
  }

  const StaticProfile profile = static_profile(prepare_circuit(dag, opts.base));
  const double t_prod = expected_cycles_per_state(opts.base.mechanism);
  if (std::isfinite(t_prod)) {
    result.F_naive_peak = f_naive(profile.gamma_peak, t_prod);
    result.F_naive_avg = f_naive(profile.gamma_avg, t_prod);
  }
  result.static_cycles = static_cycle_count(dag, opts.base);
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "mechanism,mode,F,trials,mean_C,std_C,mean_V,std_V,mean_peak_demand,mean_fixups,"
         "mean_stalls\n";
  auto write = [&](const std::vector<SweepRow>& rows) {
    for (const SweepRow& r : rows) {
      out << to_string(result.mechanism) << ',' << to_string(r.mode) << ',' << r.F << ','
          << r.stats.count << ',' << full_precision(r.stats.cycles.mean) << ','
          << full_precision(r.stats.cycles.stddev) << ',' << full_precision(r.stats.volume.mean)
          << ',' << full_precision(r.stats.volume.stddev) << ','
          << full_precision(r.stats.peak_demand.mean) << ',' << full_precision(r.stats.fixups.mean)
          << ',' << full_precision(r.stats.stalls.mean) << '\n';
    }
  };
  write(result.rows);
  if (result.mode != SimulationMode::A) {
    write(result.deterministic_rows);
  }
  return out.str();
}

Json sweep_summary_json(const SweepResult& result) {
  return Json{{"mechanism", to_string(result.mechanism)},
              {"mode", to_string(result.mode)},
              {"F_star", result.F_star},
              {"F_plateau", result.F_plateau},
              {"F_det", result.F_det},
              {"F_star_det", result.F_star_det},
              {"F_naive_peak", result.F_naive_peak},
              {"F_naive_avg", result.F_naive_avg},
              {"savings", result.F_det - result.F_star},
              {"static_cycles", result.static_cycles},
              {"non_monotone_F", result.non_monotone_F},
              {"trials", result.trials},
              {"base_seed", result.base_seed},
              {"epsilon", result.epsilon}};
}

MechanismConfig derive_mechanism(const MechanismConfig& base, double p, int d, CostUnits units) {
  if (d < 1) {
    throw InputError("code distance must be >= 1");
  }
  MechanismConfig out = std::visit(
      overloaded{
          [&](DistillationConfig c) -> MechanismConfig {
            c.p_phys = p;
            c.abort_rate.reset();
            c.t_prod = static_cast<int>(std::ceil(18.0 * d / 7.0 - 1e-9));
            if (units == CostUnits::physical) {
              c.cost_per_factory = 810.0 * d * d / 49.0;
            }
            return c;
          },
          [&](CultivationConfig c) -> MechanismConfig {
            c.p_phys = p;
            c.d2 = d;
            c.q1.reset();
            c.q2.reset();
            c.t_escape.reset();
            return c;
          },
          [&](RzSynthConfig c) -> MechanismConfig {
            c.p_phys = p;
            c.d = d;
            c.q_round.reset();
            c.t_attempt.reset();
            return c;
          },
      },
      base);
  validate(out);
  return out;
}

std::vector<SensitivityCell> sensitivity_grid(const CircuitDag& dag, const SensitivityOptions& opts) {
  if (opts.per_list.empty() || opts.distance_list.empty() || opts.f_list.empty()) {
    throw InputError("sensitivity grid needs non-empty p, d and F lists");
  }
  if (opts.trials < 1) {
    throw InputError("trials must be >= 1");
  }
  std::vector<SensitivityCell> cells;
  for (double p : opts.per_list) {
    for (int d : opts.distance_list) {
      SimConfig cfg = opts.base;
      cfg.mechanism = derive_mechanism(opts.base.mechanism, p, d, opts.base.cost_units);
      if (mechanism_of(cfg.mechanism) == Mechanism::distillation &&
          cfg.cost_units == CostUnits::physical && !cfg.cost_per_logical_qubit) {
        cfg.cost_per_logical_qubit = 2.0 * d * d;
      }
      const std::uint64_t seed =
          derive_seed(derive_seed(opts.base_seed, std::bit_cast<std::uint64_t>(p)),
                      static_cast<std::uint64_t>(d));
      const auto stats =
          run_cells(dag, cfg, opts.f_list, opts.trials, seed, opts.threads);
      for (std::size_t i = 0; i < opts.f_list.size(); ++i) {
        cells.push_back(SensitivityCell{p, d, opts.f_list[i], stats[i]});
      }
    }
  }
  return cells;
}

std::string sensitivity_csv(const std::vector<SensitivityCell>& cells) {
  std::ostringstream out;
  out << "p,d,F,mean_V,std_V\n";
  for (const SensitivityCell& c : cells) {
    out << full_precision(c.p) << ',' << c.d << ',' << c.F << ','
        << full_precision(c.stats.volume.mean) << ',' << full_precision(c.stats.volume.stddev)
        << '\n';
  }
  return out.str();
}

}  // namespace magicsim
