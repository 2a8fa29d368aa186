// Acceptance run: one line per criterion, non-zero exit if a hard criterion
// fails. Every simulation here runs with invariant checks on.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.h"
#include "magicsim/angle.h"
#include "magicsim/errors.h"
#include "magicsim/json_io.h"
#include "magicsim/metrics.h"
#include "magicsim/production.h"
#include "magicsim/profile.h"
#include "magicsim/qasm.h"
#include "magicsim/scheduler.h"
#include "magicsim/sweep.h"
#include "support/generators.h"
#include "support/oracle.h"

namespace fs = std::filesystem;
using namespace magicsim;
using magicsim::testing::BurstyOptions;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::int64_t g_invariant_checks = 0;
std::int64_t g_checked_runs = 0;

int threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

SimResult run(const CircuitDag& dag, SimConfig cfg) {
  cfg.check_invariants = true;
  SimResult r = simulate(dag, cfg);
  g_invariant_checks += r.invariant_checks;
  ++g_checked_runs;
  return r;
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream out;
  out.precision(digits);
  out << x;
  return out.str();
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  RandomStream rng(20240601);
  int matches = 0;
  std::string first_mismatch;
  for (int i = 0; i < 200; ++i) {
    const auto circuit = magicsim::testing::random_circuit(rng, 12, 4);
    const int t_prod = 1 + static_cast<int>(rng.next() % 3);
    const int F = 1 + static_cast<int>(rng.next() % 3);
    DistillationConfig d;
    d.abort_rate = 0.0;
    d.t_prod = t_prod;
    SimConfig cfg;
    cfg.mechanism = d;
    cfg.F = F;
    cfg.mode = SimulationMode::A;
    const SimResult r = run(circuit.dag, cfg);
    const auto o = magicsim::testing::oracle_simulate(circuit.gates, {F, t_prod, true, 1});
    if (r.cycles == o.cycles) {
      ++matches;
    } else if (first_mismatch.empty()) {
      first_mismatch = "; first mismatch at circuit " + std::to_string(i) + ": " +
                       std::to_string(r.cycles) + " vs " + std::to_string(o.cycles);
    }
  }
  return {matches == 200, std::to_string(matches) + "/200 circuits match" + first_mismatch};
}

Outcome injection_failure_rate() {
  // 40 qubits x 100 T gates with cx every 10 layers, 100 trials.
  CircuitDag dag(40);
  for (int layer = 0; layer < 100; ++layer) {
    for (int q = 0; q < 40; ++q) {
      dag.append(gate::TInjection{}, {q}, 1);
    }
    if (layer % 10 == 9) {
      for (int q = 0; q + 1 < 40; q += 2) {
        dag.append(gate::Clifford{"cx"}, {q, q + 1}, 1);
      }
    }
  }
  std::int64_t injections = 0;
  std::int64_t failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SimConfig cfg;
    cfg.F = 60;
    cfg.mode = SimulationMode::C;
    cfg.trial_seed = sweep_trial_seed(7, cfg.F, trial);
    const SimResult r = run(dag, cfg);
    injections += r.injection_count;
    failures += r.fixup_count;
  }
  const double frac = static_cast<double>(failures) / static_cast<double>(injections);
  return {injections >= 100'000 && frac >= 0.495 && frac <= 0.505,
          "failure fraction " + fmt(frac, 6) + " over " + std::to_string(injections) +
              " injections (band [0.495, 0.505])"};
}

Outcome distillation_abort_rate() {
  DistillationConfig d;
  d.p_phys = 1e-4;
  ProductionBank bank(d, 200, 99);
  const Cycle horizon = 18 * 5000 + 20;
  for (Cycle c = 1; c <= horizon; ++c) {
    bank.step(c);
    bank.request(1'000'000);
    bank.check_invariants();
  }
  const double rounds = static_cast<double>(bank.buffer().produced_total + bank.failed_attempts());
  const double rate = static_cast<double>(bank.failed_attempts()) / rounds;
  const double target = 0.0015105;
  return {rounds >= 2e5 && std::abs(rate - target) <= 0.25 * target,
          "abort rate " + fmt(rate, 5) + " over " + fmt(rounds, 7) + " rounds (target 0.0015105 +/- 25%; 15p+105p^2 = " +
              fmt(abort_rate_15to1(1e-4), 6) + ")"};
}

Outcome rz_injections_per_gate() {
  // Angles 0.1 + k*sqrt(2)/100 mod 2pi never double onto a Clifford angle
  // within a realistic cascade length.
  CircuitDag dag(50);
  int gates = 0;
  for (int layer = 0; layer < 20; ++layer) {
    for (int q = 0; q < 50; ++q) {
      const double angle = std::fmod(0.1 + std::sqrt(2.0) * 0.01 * gates, kTwoPi);
      dag.append(gate::RzInjection{angle}, {q}, 1);
      ++gates;
    }
  }
  std::int64_t injections = 0;
  std::int64_t logical = 0;
  for (int trial = 0; trial < 50; ++trial) {
    SimConfig cfg;
    cfg.mechanism = RzSynthConfig{};
    cfg.F = 100;
    cfg.mode = SimulationMode::C;
    cfg.trial_seed = sweep_trial_seed(11, cfg.F, trial);
    const SimResult r = run(dag, cfg);
    injections += r.injection_count;
    logical += gates;
  }
  const double mean = static_cast<double>(injections) / static_cast<double>(logical);
  return {logical >= 10'000 && std::abs(mean - 2.0) <= 0.04,
          "mean injections per logical rz " + fmt(mean, 5) + " over " + std::to_string(logical) +
              " gates (target 2.0 +/- 2%)"};
}

Outcome cultivation_self_consistency() {
  struct Setting {
    std::optional<double> q1, q2;
    std::string label;
  };
  const std::vector<Setting> settings = {
      {0.0, 0.0, "q1=q2=0"}, {0.02, 0.05, "q1=0.02,q2=0.05"}, {std::nullopt, std::nullopt, "defaults"}};
  bool ok = true;
  std::string detail;
  for (const Setting& s : settings) {
    CultivationConfig c;
    c.q1 = s.q1;
    c.q2 = s.q2;
    const double expected = expected_throughput(c);
    const int units = 500;
    // Long enough for >= 10^4 accepted states and a negligible cold start.
    const Cycle horizon = std::max<Cycle>(20'000, static_cast<Cycle>(12'000.0 / (expected * units)));
    ProductionBank bank(c, units, 5);
    for (Cycle cyc = 1; cyc <= horizon; ++cyc) {
      bank.step(cyc);
      bank.request(1'000'000);
    }
    bank.check_invariants();
    const auto accepted = bank.buffer().produced_total;
    const double rate = static_cast<double>(accepted) / (static_cast<double>(units) * horizon);
    const double rel = std::abs(rate - expected) / expected;
    ok = ok && accepted >= 10'000 && rel <= 0.05;
    detail += (detail.empty() ? "" : "; ") + s.label + ": " + fmt(rate, 5) + " vs " + fmt(expected, 5) +
              " (" + fmt(100 * rel, 2) + "%, " + std::to_string(accepted) + " states)";
  }
  return {ok, detail};
}

// Shared sweep on the bursty circuit.
struct SweepRun {
  SweepResult result;
  double seconds = 0.0;
};

SweepOptions bursty_sweep_options(Mechanism m) {
  SweepOptions opts;
  opts.base.mechanism = default_config(m);
  opts.base.mode = SimulationMode::D;
  opts.base.cost_units = CostUnits::physical;
  opts.base.check_invariants = true;
  opts.f_min = 1;
  opts.f_max = 100;
  opts.trials = 100;
  opts.base_seed = 2024;
  opts.threads = threads();
  return opts;
}

SweepRun bursty_sweep(const CircuitDag& dag, Mechanism m) {
  const auto start = std::chrono::steady_clock::now();
  SweepRun s;
  s.result = sweep_factories(dag, bursty_sweep_options(m));
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

std::string peak_histogram(const std::vector<int>& peaks) {
  std::map<int, int> h;
  for (int p : peaks) {
    ++h[p];
  }
  std::string out;
  for (const auto& [peak, n] : h) {
    out += (out.empty() ? "" : " ") + std::to_string(peak) + ":" + std::to_string(n);
  }
  return out;
}

Outcome demand_smoothing(const CircuitDag& dag, const SweepRun& distillation) {
  const int F = distillation.result.F_det;
  const int det_peak = static_profile(dag).gamma_peak;
  std::vector<int> peaks;
  int below = 0;
  for (int trial = 0; trial < 200; ++trial) {
    SimConfig cfg;
    cfg.F = F;
    cfg.mode = SimulationMode::D;
    cfg.trial_seed = sweep_trial_seed(2024, F, trial);
    const SimResult r = run(dag, cfg);
    peaks.push_back(r.peak_demand);
    below += r.peak_demand < det_peak ? 1 : 0;
  }
  double mean_peak = 0.0;
  for (int p : peaks) {
    mean_peak += p;
  }
  mean_peak /= static_cast<double>(peaks.size());

  SimConfig det;
  det.F = F;
  det.mode = SimulationMode::A;
  const int mode_a_peak = run(dag, det).peak_demand;

  std::string detail = "F_det=" + std::to_string(F) + ", deterministic peak " + std::to_string(det_peak) +
                       ", stochastic peak below it in " + std::to_string(below) +
                       "/200 trials (mean " + fmt(mean_peak) + ", histogram " + peak_histogram(peaks) +
                       "); Mode A run at F_det peaks at " + std::to_string(mode_a_peak);
  return {below >= 190, detail};
}

// Reported only: the brickwork variant of the bursty circuit.
std::string brickwork_report(int F) {
  BurstyOptions b;
  b.entangling = true;
  const CircuitDag dag = magicsim::testing::bursty_circuit(b);
  std::vector<int> peaks;
  for (int trial = 0; trial < 200; ++trial) {
    SimConfig cfg;
    cfg.F = F;
    cfg.trial_seed = sweep_trial_seed(2024, F, trial);
    peaks.push_back(run(dag, cfg).peak_demand);
  }
  return "cx-brickwork variant at F=" + std::to_string(F) + ": peak histogram " + peak_histogram(peaks);
}

std::optional<std::string> knn_path() {
  if (const char* env = std::getenv("MAGICSIM_KNN_N25")) {
    return std::string(env);
  }
  for (const char* rel : {"benchmarks/knn_n25.qasm", "examples/knn_n25.qasm"}) {
    const fs::path p = fs::path(MAGICSIM_SOURCE_DIR) / rel;
    if (fs::exists(p)) {
      return p.string();
    }
  }
  return std::nullopt;
}

std::string knn_report() {
  const auto path = knn_path();
  if (!path) {
    return "knn_n25 not present, skipped";
  }
  try {
    const CircuitDag dag = load_qasm_file(*path);
    SweepOptions opts = bursty_sweep_options(Mechanism::distillation);
    opts.f_max = 120;
    const SweepResult s = sweep_factories(dag, opts);
    const int det_peak = static_profile(dag).gamma_peak;
    std::vector<int> peaks;
    for (int trial = 0; trial < 100; ++trial) {
      SimConfig cfg = opts.base;
      cfg.F = s.F_det;
      cfg.trial_seed = sweep_trial_seed(opts.base_seed, s.F_det, trial);
      peaks.push_back(run(dag, cfg).peak_demand);
    }
    const int max_peak = *std::max_element(peaks.begin(), peaks.end());
    const bool peak_ok = det_peak == 15 && std::abs(max_peak - 13) <= 1;
    const bool f_ok = std::abs(s.F_star - 54) <= 5.4 && std::abs(s.F_det - 75) <= 7.5;
    return std::string("knn_n25: deterministic peak ") + std::to_string(det_peak) + ", stochastic max peak " +
           std::to_string(max_peak) + (peak_ok ? " (matches 15 / 13+-1)" : " (MISMATCH vs 15 / 13+-1)") +
           ", F*=" + std::to_string(s.F_star) + ", F_det=" + std::to_string(s.F_det) +
           (f_ok ? " (within 10% of 54 / 75)" : " (outside 10% of 54 / 75)");
  } catch (const std::exception& e) {
    return std::string("knn_n25 present but failed: ") + e.what();
  }
}

Outcome payoff_ordering(const SweepRun& dist, const SweepRun& cult, const SweepRun& rz) {
  const auto& d = dist.result;
  const bool dist_ok = d.F_plateau <= d.F_det && d.F_star <= d.F_star_det;
  const bool cult_ok = std::abs(cult.result.F_plateau - cult.result.F_det) <= 1;
  const bool rz_ok = std::abs(rz.result.F_plateau - rz.result.F_det) <= 1;
  auto line = [](const char* name, const SweepResult& s, bool ok) {
    return std::string(name) + (ok ? " ok" : " FAIL") + " (plateau D/A " + std::to_string(s.F_plateau) +
           "/" + std::to_string(s.F_det) + ", F* D/A " + std::to_string(s.F_star) + "/" +
           std::to_string(s.F_star_det) + ")";
  };
  return {dist_ok && cult_ok && rz_ok,
          line("distillation", d, dist_ok) + "; " + line("cultivation", cult.result, cult_ok) + "; " +
              line("rz", rz.result, rz_ok)};
}

struct PriceLine {
  bool ok;
  std::string text;
};

PriceLine price_at(const CircuitDag& dag, Mechanism m, int F, double lo, double hi) {
  SimConfig cfg;
  cfg.mechanism = default_config(m);
  cfg.F = F;
  cfg.cost_units = CostUnits::physical;
  std::vector<SimResult> results;
  for (int trial = 0; trial < 100; ++trial) {
    cfg.trial_seed = sweep_trial_seed(2024, F, trial);
    results.push_back(run(dag, cfg));
  }
  const TrialAggregate agg = aggregate_trials(results);
  const Cycle c_static = static_cycle_count(dag, cfg);
  const double ratio = agg.cycles.mean / static_cast<double>(c_static);
  const bool ok = ratio >= lo && ratio <= hi;
  std::string text = to_string(m) + " F=" + std::to_string(F) + " ratio " + fmt(ratio) + " (band [" +
                     fmt(lo) + ", " + (std::isinf(hi) ? std::string("inf") : fmt(hi)) + "])";
  if (!ok) {
    cfg.trial_seed = 2024;
    text += " run config " + to_json(cfg).dump();
  }
  return {ok, text};
}

Outcome price_bounds(const CircuitDag& dag) {
  const StaticProfile profile = static_profile(dag);
  const int f_dist = f_naive(profile.gamma_avg, expected_cycles_per_state(DistillationConfig{}));
  const int f_cult = f_naive(profile.gamma_avg, expected_cycles_per_state(CultivationConfig{}));
  const PriceLine a = price_at(dag, Mechanism::distillation, f_dist, 1.0, 1.5);
  const PriceLine b = price_at(dag, Mechanism::cultivation, f_cult, 1.0, 3.0);
  const PriceLine c = price_at(dag, Mechanism::rz_synthesis, 1, 3.0, INFINITY);
  return {a.ok && b.ok && c.ok, a.text + "; " + b.text + "; " + c.text};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Compares every file in a against the same name in b.
bool same_files(const fs::path& a, const fs::path& b, std::string& why) {
  int n = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      why = entry.path().filename().string() + " differs";
      return false;
    }
    ++n;
  }
  if (n == 0) {
    why = "no outputs";
    return false;
  }
  return true;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("magicsim-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  BurstyOptions small;
  small.blocks = 3;
  const fs::path qasm = dir / "bursty.qasm";
  std::ofstream(qasm) << magicsim::testing::bursty_qasm(small);

  const std::vector<std::vector<std::string>> commands = {
      {"analyze", qasm.string()},
      {"simulate", qasm.string(), "-F", "12", "--trials", "8", "--seed", "5", "--trace"},
      {"simulate", qasm.string(), "--mechanism", "rz", "-F", "4", "--trials", "4"},
      {"sweep", qasm.string(), "--f-min", "1", "--f-max", "12", "--trials", "5", "--mechanism", "cultivation"},
      {"sensitivity", qasm.string(), "--per-list", "1e-4,1e-3", "--d-list", "5,7", "--f-list", "4,8",
       "--trials", "3"},
  };
  std::ostringstream sink;
  std::string failures;
  int checked = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const fs::path first = dir / ("run" + std::to_string(i));
    const fs::path again = dir / ("replay" + std::to_string(i));
    auto args = commands[i];
    args.push_back("--out");
    args.push_back(first.string());
    if (cli::run_cli(args, sink, sink) != cli::kExitOk) {
      failures += " [" + commands[i][0] + " exited non-zero]";
      continue;
    }
    if (cli::run_cli({"replay", (first / "manifest.json").string(), "--out", again.string(), "--threads", "1"},
                     sink, sink) != cli::kExitOk) {
      failures += " [replay of " + commands[i][0] + " exited non-zero]";
      continue;
    }
    std::string why;
    if (!same_files(first, again, why)) {
      failures += " [" + commands[i][0] + ": " + why + "]";
    }
    ++checked;
  }

  // Mode A ignores the seed.
  const CircuitDag dag = magicsim::testing::bursty_circuit(small);
  int seed_checks = 0;
  for (Mechanism m : {Mechanism::distillation, Mechanism::cultivation, Mechanism::rz_synthesis}) {
    SimConfig cfg;
    cfg.mechanism = default_config(m);
    cfg.F = 6;
    cfg.mode = SimulationMode::A;
    cfg.trial_seed = 1;
    const SimResult x = run(dag, cfg);
    cfg.trial_seed = 0xfeedbeefULL;
    const SimResult y = run(dag, cfg);
    if (x.cycles != y.cycles || x.demand_trace != y.demand_trace || x.stall_trace != y.stall_trace) {
      failures += " [Mode A depends on the seed for " + to_string(m) + "]";
    }
    ++seed_checks;
  }
  fs::remove_all(dir);
  return {failures.empty(), std::to_string(checked) + "/5 commands replayed bitwise-identically, Mode A seed-independent for " +
                                std::to_string(seed_checks) + " mechanisms" + failures};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, bool>> summary;
  bool hard_failure = false;
  bool invariant_failure = false;

  auto report = [&](int id, const std::string& name, double limit_s, bool soft,
                    const std::function<Outcome()>& body, double extra_s = 0.0) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const InvariantViolation& e) {
      invariant_failure = true;
      o = {false, std::string("invariant violation: ") + e.what()};
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() + extra_s;
    if (limit_s > 0 && secs > limit_s) {
      o.pass = false;
      o.detail += "; took " + fmt(secs) + " s, limit " + fmt(limit_s) + " s";
    }
    const char* verdict = o.pass ? "PASS" : (soft ? "DEVIATION" : "FAIL");
    std::printf("criterion %2d %-28s %-9s %s [%.1f s]\n", id, name.c_str(), verdict, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass && !soft) {
      hard_failure = true;
    }
  };

  report(1, "oracle-equivalence", 10, false, oracle_equivalence);
  report(2, "injection-failure-rate", 30, false, injection_failure_rate);
  report(3, "distillation-abort-rate", 30, false, distillation_abort_rate);
  report(4, "rz-injections-per-gate", 30, false, rz_injections_per_gate);
  report(5, "cultivation-throughput", 60, false, cultivation_self_consistency);

  const CircuitDag bursty = magicsim::testing::bursty_circuit();
  std::optional<SweepRun> dist, cult, rz;
  std::string sweep_error;
  try {
    dist = bursty_sweep(bursty, Mechanism::distillation);
    cult = bursty_sweep(bursty, Mechanism::cultivation);
    rz = bursty_sweep(bursty, Mechanism::rz_synthesis);
  } catch (const InvariantViolation& e) {
    invariant_failure = true;
    sweep_error = std::string("invariant violation in sweep: ") + e.what();
  } catch (const std::exception& e) {
    sweep_error = std::string("sweep failed: ") + e.what();
  }
  auto need_sweeps = [&]() {
    if (!sweep_error.empty()) {
      throw SimulationError(sweep_error);
    }
  };

  report(6, "demand-smoothing", 300, false, [&] {
    need_sweeps();
    return demand_smoothing(bursty, *dist);
  });
  if (dist) {
    std::printf("             %s\n", brickwork_report(dist->result.F_det).c_str());
  }
  std::printf("             %s\n", knn_report().c_str());
  const double sweep_secs = dist && cult && rz ? dist->seconds + cult->seconds + rz->seconds : 0.0;
  report(7, "payoff-ordering", 900, false, [&] {
    need_sweeps();
    return payoff_ordering(*dist, *cult, *rz);
  }, sweep_secs);
  report(8, "price-bounds", 0, true, [&] { return price_bounds(bursty); });
  report(9, "determinism", 60, false, determinism);
  report(10, "conservation-suite", 0, false, [&] {
    return Outcome{!invariant_failure && g_invariant_checks > 0,
                   std::to_string(g_invariant_checks) + " invariant checks over " + std::to_string(g_checked_runs) +
                       " checked simulations plus all sweep trials" +
                       (invariant_failure ? ", violation seen" : ", none violated")};
  });

  return hard_failure ? 1 : 0;
}
