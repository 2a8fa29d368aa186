#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "magicsim/circuit.h"
#include "magicsim/rng.h"

namespace magicsim {

enum class Mechanism { distillation, cultivation, rz_synthesis };

std::string to_string(Mechanism m);
Mechanism parse_mechanism(const std::string& name);

// Qubit-cost presets: abstract logical tiles, or physical qubits.
enum class CostUnits { logical_tiles, physical };

std::string to_string(CostUnits u);
CostUnits parse_cost_units(const std::string& name);

// Scale factors for the per-round discard defaults q = c * p * d^2. These are
// calibration knobs, not measured values.
inline constexpr double kCultivationStage1Scale = 10.0;
inline constexpr double kCultivationStage2Scale = 10.0;
inline constexpr double kRzRoundScale = 10.0;

// 15-to-1 distillation discard probability, 15p + 105p^2, for 0 <= p <= 0.01.
double abort_rate_15to1(double p_phys);

struct DistillationConfig {
  double p_phys = 1e-4;
  int t_prod = 18;
  std::optional<double> abort_rate;  // unset: abort_rate_15to1(p_phys)
  bool stagger = true;
  std::optional<double> cost_per_factory;  // unset: preset (11 tiles / 810 physical)

  double resolved_abort_rate() const;
};

struct CultivationConfig {
  int d1 = 3;
  int d2 = 7;
  int r1 = 3;
  int r2 = 5;
  double p_phys = 1e-3;
  std::optional<double> q1;  // unset: kCultivationStage1Scale * p * d1^2
  std::optional<double> q2;  // unset: kCultivationStage2Scale * p * d2^2
  int t_inject = 1;
  std::optional<int> t_escape;         // unset: d2
  std::optional<int> buffer_capacity;  // unset: number of units
  std::optional<double> cost_per_unit;  // unset: preset (1 tile / 2*d2^2 physical)
  // Fail each round independently and restart at once, instead of resolving
  // a whole stage at its last round.
  bool early_abort = false;

  double resolved_q1() const;
  double resolved_q2() const;
  int resolved_t_escape() const { return t_escape.value_or(d2); }
  // Probability an attempt survives stage 1 / stage 2.
  double stage1_survival() const;
  double stage2_survival() const;
};

struct RzSynthConfig {
  int d = 3;
  double p_phys = 1e-3;
  std::optional<double> q_round;  // unset: kRzRoundScale * p * d^2
  std::optional<int> t_attempt;   // unset: d
  std::string unit_budget_policy = "shared-fifo";
  std::optional<double> cost_per_unit;  // unset: preset (1 tile / 2*d^2 physical)

  double resolved_q_round() const;
  int resolved_t_attempt() const { return t_attempt.value_or(d); }
};

using MechanismConfig = std::variant<DistillationConfig, CultivationConfig, RzSynthConfig>;

Mechanism mechanism_of(const MechanismConfig& cfg);
MechanismConfig default_config(Mechanism m);

// Throws ConfigError when a config breaks its invariants.
void validate(const MechanismConfig& cfg);

// Fills every optional field with its resolved default. buffer_capacity stays
// unset (it depends on the unit count).
MechanismConfig resolve_defaults(const MechanismConfig& cfg, CostUnits units);

// Qubit cost of one production unit under the given preset, unless the config
// overrides it.
double production_unit_cost(const MechanismConfig& cfg, CostUnits units);

// Code distance of the data patches under the physical preset.
int data_code_distance(const MechanismConfig& cfg);

// Expected accepted states per cycle for one unit. 0 when success is impossible.
double expected_throughput(const MechanismConfig& cfg);
// 1 / expected_throughput; +infinity when no state can ever be produced.
double expected_cycles_per_state(const MechanismConfig& cfg);
// Cycles from cold start to the first state when nothing fails.
Cycle minimum_latency(const MechanismConfig& cfg);

struct Buffer {
  std::optional<std::int64_t> capacity;  // unset: unbounded
  std::int64_t count = 0;
  std::int64_t produced_total = 0;
  std::int64_t consumed_total = 0;

  bool has_room() const { return !capacity || count < *capacity; }
};

struct BankOptions {
  // Force all failure probabilities to zero (modes A and C).
  bool deterministic = false;
  // Cycles between a state being produced and it becoming consumable.
  int handoff_latency = 1;
};

/*
 * F production units of one mechanism feeding the circuit.
 *
 * Call step() once per cycle, in increasing order, before any request() for
 * that cycle. Distillation units share one unbounded buffer; cultivation units
 * share a buffer of buffer_capacity and hold a finished state while it is
 * full; Rz units are assigned to angle demands and each holds at most one
 * angle-tagged state until it is consumed.
 */
class ProductionBank {
 public:
  ProductionBank(MechanismConfig cfg, int units, std::uint64_t seed, BankOptions opts = {});

  // Advances every unit through `cycle`; returns states produced this cycle.
  int step(Cycle cycle);

  // Grants up to n consumable states. Rz banks need the angle and grant only
  // matching states.
  int request(int n, std::optional<double> angle = std::nullopt);

  // Rz only: queue a demand for `angle`. Returns true when an idle unit took it
  // (it starts on the next cycle).
  bool register_demand(double angle, Cycle cycle);

  Mechanism mechanism() const { return mechanism_of(cfg_); }
  const MechanismConfig& config() const { return cfg_; }
  int unit_count() const { return static_cast<int>(units_.size()); }
  const Buffer& buffer() const { return buffer_; }
  std::int64_t consumable() const;
  std::int64_t failed_attempts() const { return failed_attempts_; }
  int busy_units() const;
  std::size_t queued_demands() const { return demand_queue_.size(); }
  Cycle current_cycle() const { return cycle_; }
  bool can_ever_produce() const;

  // Distillation: cycle offset before each unit's first round.
  std::vector<Cycle> start_offsets() const;

  // Throws InvariantViolation if buffer accounting is inconsistent.
  void check_invariants() const;

 private:
  struct Unit {
    RandomStream rng;
    Cycle offset = 0;  // distillation stagger
    int stage = 1;     // cultivation: 1 or 2
    int rounds_done = 0;  // cultivation early abort: rounds passed in this stage
    bool holding = false;   // cultivation: finished but buffer full; rz: state held
    bool assigned = false;  // rz
    double angle = 0.0;     // rz
    Cycle ready_cycle = 0;  // rz: when the held state becomes consumable
  };

  void on_event(int unit, Cycle at);
  void on_distillation(Unit& u, int unit, Cycle at);
  void on_cultivation(Unit& u, int unit, Cycle at);
  void on_rz(Unit& u, int unit, Cycle at);
  void start_cultivation_stage(int unit, int stage, Cycle from);
  void deposit(Cycle at);
  void assign(int unit, double angle);
  void schedule(int unit, Cycle at) { events_.emplace(at, unit); }

  MechanismConfig cfg_;
  BankOptions opts_;
  std::vector<Unit> units_;
  Buffer buffer_;
  // (ready cycle, count) for shared-buffer states not yet consumable.
  std::deque<std::pair<Cycle, std::int64_t>> in_transit_;
  std::int64_t consumable_ = 0;
  std::deque<double> demand_queue_;
  std::int64_t failed_attempts_ = 0;
  Cycle cycle_ = 0;
  int produced_this_cycle_ = 0;

  // (cycle, unit) of each unit's next round end or stage check.
  std::priority_queue<std::pair<Cycle, int>, std::vector<std::pair<Cycle, int>>, std::greater<>>
      events_;
  // Cultivation units holding a finished state, in the order they filled up.
  std::deque<int> holding_;

  // Cached per-mechanism parameters.
  double fail_prob_a_ = 0.0;  // abort rate | q1 or 1-s1 | q_round
  double fail_prob_b_ = 0.0;  // q2 or 1-s2
  bool early_abort_ = false;
  int len_fixed1_ = 0, len_rounds1_ = 0, len_fixed2_ = 0, len_rounds2_ = 0;
  int round_length_ = 0;  // distillation t_prod | rz t_attempt
};

}  // namespace magicsim
