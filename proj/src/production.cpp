#include "magicsim/production.h"

#include <cmath>

#include "magicsim/angle.h"
#include "magicsim/errors.h"

namespace magicsim {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) {
    throw ConfigError(msg);
  }
}

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

// Range checks shared by validate() and the bank. Failure probabilities of
// exactly 1 pass here; validate() rejects them.
void check_ranges(const DistillationConfig& c) {
  require(is_probability(c.p_phys), "distillation p_phys must be in [0, 1]");
  require(c.t_prod >= 1, "distillation t_prod must be >= 1");
  require(is_probability(c.resolved_abort_rate()), "distillation abort_rate must be in [0, 1)");
  require(!c.cost_per_factory || *c.cost_per_factory > 0.0,
          "distillation cost_per_factory must be > 0");
}

void check_ranges(const CultivationConfig& c) {
  require(c.d1 >= 1 && c.d2 > c.d1, "cultivation needs 1 <= d1 < d2");
  require(c.r1 >= 1 && c.r2 >= 1, "cultivation r1 and r2 must be >= 1");
  require(is_probability(c.p_phys), "cultivation p_phys must be in [0, 1]");
  require(is_probability(c.resolved_q1()), "cultivation q1 must be in [0, 1)");
  require(is_probability(c.resolved_q2()), "cultivation q2 must be in [0, 1)");
  require(c.t_inject >= 1, "cultivation t_inject must be >= 1");
  require(c.resolved_t_escape() >= 1, "cultivation t_escape must be >= 1");
  require(!c.buffer_capacity || *c.buffer_capacity >= 0, "cultivation buffer_capacity must be >= 0");
  require(!c.cost_per_unit || *c.cost_per_unit > 0.0, "cultivation cost_per_unit must be > 0");
}

void check_ranges(const RzSynthConfig& c) {
  require(c.d >= 1, "rz d must be >= 1");
  require(is_probability(c.p_phys), "rz p_phys must be in [0, 1]");
  require(is_probability(c.resolved_q_round()), "rz q_round must be in [0, 1)");
  require(c.resolved_t_attempt() >= 1, "rz t_attempt must be >= 1");
  require(c.unit_budget_policy == "shared-fifo",
          "rz unit_budget_policy must be \"shared-fifo\", got \"" + c.unit_budget_policy + "\"");
  require(!c.cost_per_unit || *c.cost_per_unit > 0.0, "rz cost_per_unit must be > 0");
}

// sum_{k=0}^{r-1} (1-q)^k: expected rounds run when each fails with q and the
// first failure stops the stage.
double expected_rounds(double q, int r) {
  double total = 0.0;
  double survive = 1.0;
  for (int k = 0; k < r; ++k) {
    total += survive;
    survive *= 1.0 - q;
  }
  return total;
}

}  // namespace

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::distillation:
      return "distillation";
    case Mechanism::cultivation:
      return "cultivation";
    case Mechanism::rz_synthesis:
      return "rz";
  }
  return "?";
}

Mechanism parse_mechanism(const std::string& name) {
  if (name == "distillation") {
    return Mechanism::distillation;
  }
  if (name == "cultivation") {
    return Mechanism::cultivation;
  }
  if (name == "rz" || name == "rz-synthesis" || name == "rz_synthesis") {
    return Mechanism::rz_synthesis;
  }
  throw ConfigError("unknown mechanism '" + name + "' (expected distillation, cultivation or rz)");
}

std::string to_string(CostUnits u) {
  return u == CostUnits::physical ? "physical" : "logical-tiles";
}

CostUnits parse_cost_units(const std::string& name) {
  if (name == "logical-tiles") {
    return CostUnits::logical_tiles;
  }
  if (name == "physical") {
    return CostUnits::physical;
  }
  throw ConfigError("unknown cost units '" + name + "' (expected logical-tiles or physical)");
}

double abort_rate_15to1(double p_phys) {
  if (!(p_phys >= 0.0 && p_phys <= 0.01)) {
    throw ConfigError("abort_rate_15to1: p_phys must be in [0, 0.01], got " + std::to_string(p_phys));
  }
  return 15.0 * p_phys + 105.0 * p_phys * p_phys;
}

double DistillationConfig::resolved_abort_rate() const {
  return abort_rate ? *abort_rate : abort_rate_15to1(p_phys);
}

double CultivationConfig::resolved_q1() const {
  return q1 ? *q1 : kCultivationStage1Scale * p_phys * d1 * d1;
}

double CultivationConfig::resolved_q2() const {
  return q2 ? *q2 : kCultivationStage2Scale * p_phys * d2 * d2;
}

double CultivationConfig::stage1_survival() const { return std::pow(1.0 - resolved_q1(), r1); }

double CultivationConfig::stage2_survival() const { return std::pow(1.0 - resolved_q2(), r2); }

double RzSynthConfig::resolved_q_round() const {
  return q_round ? *q_round : kRzRoundScale * p_phys * d * d;
}

Mechanism mechanism_of(const MechanismConfig& cfg) {
  return static_cast<Mechanism>(cfg.index());
}

MechanismConfig default_config(Mechanism m) {
  switch (m) {
    case Mechanism::distillation:
      return DistillationConfig{};
    case Mechanism::cultivation:
      return CultivationConfig{};
    case Mechanism::rz_synthesis:
      return RzSynthConfig{};
  }
  return DistillationConfig{};
}

void validate(const MechanismConfig& cfg) {
  std::visit(
      overloaded{
          [](const DistillationConfig& c) {
            check_ranges(c);
            require(c.resolved_abort_rate() < 1.0, "distillation abort_rate must be < 1");
          },
          [](const CultivationConfig& c) {
            check_ranges(c);
            require(c.resolved_q1() < 1.0, "cultivation q1 must be < 1");
            require(c.resolved_q2() < 1.0, "cultivation q2 must be < 1");
          },
          [](const RzSynthConfig& c) {
            check_ranges(c);
            require(c.resolved_q_round() < 1.0, "rz q_round must be < 1");
          },
      },
      cfg);
}

MechanismConfig resolve_defaults(const MechanismConfig& cfg, CostUnits units) {
  const double cost = production_unit_cost(cfg, units);
  return std::visit(overloaded{
                        [&](DistillationConfig c) -> MechanismConfig {
                          c.abort_rate = c.resolved_abort_rate();
                          c.cost_per_factory = cost;
                          return c;
                        },
                        [&](CultivationConfig c) -> MechanismConfig {
                          c.q1 = c.resolved_q1();
                          c.q2 = c.resolved_q2();
                          c.t_escape = c.resolved_t_escape();
                          c.cost_per_unit = cost;
                          return c;
                        },
                        [&](RzSynthConfig c) -> MechanismConfig {
                          c.q_round = c.resolved_q_round();
                          c.t_attempt = c.resolved_t_attempt();
                          c.cost_per_unit = cost;
                          return c;
                        },
                    },
                    cfg);
}

double production_unit_cost(const MechanismConfig& cfg, CostUnits units) {
  const bool physical = units == CostUnits::physical;
  return std::visit(
      overloaded{
          [&](const DistillationConfig& c) {
            return c.cost_per_factory.value_or(physical ? 810.0 : 11.0);
          },
          [&](const CultivationConfig& c) {
            return c.cost_per_unit.value_or(physical ? 2.0 * c.d2 * c.d2 : 1.0);
          },
          [&](const RzSynthConfig& c) {
            return c.cost_per_unit.value_or(physical ? 2.0 * c.d * c.d : 1.0);
          },
      },
      cfg);
}

int data_code_distance(const MechanismConfig& cfg) {
  return std::visit(overloaded{
                        [](const DistillationConfig&) { return 7; },
                        [](const CultivationConfig& c) { return c.d2; },
                        [](const RzSynthConfig& c) { return c.d; },
                    },
                    cfg);
}

double expected_throughput(const MechanismConfig& cfg) {
  return std::visit(
      overloaded{
          [](const DistillationConfig& c) {
            check_ranges(c);
            return (1.0 - c.resolved_abort_rate()) / c.t_prod;
          },
          [](const CultivationConfig& c) {
            check_ranges(c);
            const double s1 = c.stage1_survival();
            const double s2 = c.stage2_survival();
            double attempt;
            if (c.early_abort) {
              attempt = c.t_inject + expected_rounds(c.resolved_q1(), c.r1) +
                        s1 * (c.resolved_t_escape() + expected_rounds(c.resolved_q2(), c.r2));
            } else {
              attempt = (c.t_inject + c.r1) + s1 * (c.resolved_t_escape() + c.r2);
            }
            return s1 * s2 / attempt;
          },
          [](const RzSynthConfig& c) {
            check_ranges(c);
            return (1.0 - c.resolved_q_round()) / c.resolved_t_attempt();
          },
      },
      cfg);
}

double expected_cycles_per_state(const MechanismConfig& cfg) {
  const double rate = expected_throughput(cfg);
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

Cycle minimum_latency(const MechanismConfig& cfg) {
  return std::visit(overloaded{
                        [](const DistillationConfig& c) -> Cycle { return c.t_prod; },
                        [](const CultivationConfig& c) -> Cycle {
                          return c.t_inject + c.r1 + c.resolved_t_escape() + c.r2;
                        },
                        [](const RzSynthConfig& c) -> Cycle { return c.resolved_t_attempt(); },
                    },
                    cfg);
}

ProductionBank::ProductionBank(MechanismConfig cfg, int units, std::uint64_t seed, BankOptions opts)
    : cfg_(std::move(cfg)), opts_(opts) {
  if (units < 0) {
    throw ConfigError("number of production units must be >= 0");
  }
  if (opts_.handoff_latency < 0) {
    throw ConfigError("handoff latency must be >= 0");
  }
  std::visit([](const auto& c) { check_ranges(c); }, cfg_);

  units_.reserve(static_cast<std::size_t>(units));
  for (int i = 0; i < units; ++i) {
    units_.push_back(Unit{RandomStream(derive_seed(seed, static_cast<std::uint64_t>(i)))});
  }

  std::visit(overloaded{
                 [&](const DistillationConfig& c) {
                   fail_prob_a_ = c.resolved_abort_rate();
                   round_length_ = c.t_prod;
                 },
                 [&](const CultivationConfig& c) {
                   early_abort_ = c.early_abort;
                   if (c.early_abort) {
                     fail_prob_a_ = c.resolved_q1();
                     fail_prob_b_ = c.resolved_q2();
                   } else {
                     fail_prob_a_ = 1.0 - c.stage1_survival();
                     fail_prob_b_ = 1.0 - c.stage2_survival();
                   }
                   len_fixed1_ = c.t_inject;
                   len_rounds1_ = c.r1;
                   len_fixed2_ = c.resolved_t_escape();
                   len_rounds2_ = c.r2;
                   buffer_.capacity = c.buffer_capacity.value_or(units);
                 },
                 [&](const RzSynthConfig& c) {
                   fail_prob_a_ = c.resolved_q_round();
                   round_length_ = c.resolved_t_attempt();
                   buffer_.capacity = units;
                 },
             },
             cfg_);
  if (opts_.deterministic) {
    fail_prob_a_ = 0.0;
    fail_prob_b_ = 0.0;
  }

  switch (mechanism()) {
    case Mechanism::distillation: {
      const bool stagger = std::get<DistillationConfig>(cfg_).stagger;
      for (int i = 0; i < units; ++i) {
        Unit& u = units_[static_cast<std::size_t>(i)];
        u.offset = stagger ? static_cast<Cycle>(i) * round_length_ / units : 0;
        schedule(i, u.offset + round_length_);
      }
      break;
    }
    case Mechanism::cultivation:
      for (int i = 0; i < units; ++i) {
        start_cultivation_stage(i, 1, 0);
      }
      break;
    case Mechanism::rz_synthesis:
      break;
  }
}

int ProductionBank::step(Cycle cycle) {
  if (cycle <= cycle_) {
    throw InvariantViolation("ProductionBank::step called out of order: cycle " +
                             std::to_string(cycle) + " after " + std::to_string(cycle_));
  }
  cycle_ = cycle;
  produced_this_cycle_ = 0;

  // Held cultivation states go in first, oldest first.
  while (!holding_.empty() && buffer_.has_room()) {
    const int i = holding_.front();
    holding_.pop_front();
    units_[static_cast<std::size_t>(i)].holding = false;
    deposit(cycle_);
    start_cultivation_stage(i, 1, cycle_);
  }

  while (!events_.empty() && events_.top().first <= cycle_) {
    const auto [at, unit] = events_.top();
    events_.pop();
    on_event(unit, at);
  }

  while (!in_transit_.empty() && in_transit_.front().first <= cycle_) {
    consumable_ += in_transit_.front().second;
    in_transit_.pop_front();
  }
  return produced_this_cycle_;
}

void ProductionBank::on_event(int unit, Cycle at) {
  Unit& u = units_[static_cast<std::size_t>(unit)];
  switch (mechanism()) {
    case Mechanism::distillation:
      on_distillation(u, unit, at);
      break;
    case Mechanism::cultivation:
      on_cultivation(u, unit, at);
      break;
    case Mechanism::rz_synthesis:
      on_rz(u, unit, at);
      break;
  }
}

void ProductionBank::deposit(Cycle at) {
  ++buffer_.count;
  ++buffer_.produced_total;
  ++produced_this_cycle_;
  const Cycle ready = at + opts_.handoff_latency;
  if (!in_transit_.empty() && in_transit_.back().first == ready) {
    ++in_transit_.back().second;
  } else {
    in_transit_.emplace_back(ready, 1);
  }
}

void ProductionBank::on_distillation(Unit& u, int unit, Cycle at) {
  if (fail_prob_a_ > 0.0 && u.rng.bernoulli(fail_prob_a_)) {
    ++failed_attempts_;
  } else {
    deposit(at);
  }
  schedule(unit, at + round_length_);
}

// Stage `stage` begins on the cycle after `from`. Early-abort units get an
// event per round; lumped units one at the end of the stage.
void ProductionBank::start_cultivation_stage(int unit, int stage, Cycle from) {
  Unit& u = units_[static_cast<std::size_t>(unit)];
  u.stage = stage;
  u.rounds_done = 0;
  const int fixed = stage == 1 ? len_fixed1_ : len_fixed2_;
  const int rounds = stage == 1 ? len_rounds1_ : len_rounds2_;
  schedule(unit, from + fixed + (early_abort_ ? 1 : rounds));
}

void ProductionBank::on_cultivation(Unit& u, int unit, Cycle at) {
  const double fail = u.stage == 1 ? fail_prob_a_ : fail_prob_b_;
  if (fail > 0.0 && u.rng.bernoulli(fail)) {
    ++failed_attempts_;
    start_cultivation_stage(unit, 1, at);
    return;
  }
  if (early_abort_) {
    const int rounds = u.stage == 1 ? len_rounds1_ : len_rounds2_;
    if (++u.rounds_done < rounds) {
      schedule(unit, at + 1);
      return;
    }
  }
  if (u.stage == 1) {
    start_cultivation_stage(unit, 2, at);
    return;
  }
  if (buffer_.has_room()) {
    deposit(at);
    start_cultivation_stage(unit, 1, at);
  } else {
    u.holding = true;
    holding_.push_back(unit);
  }
}

void ProductionBank::on_rz(Unit& u, int unit, Cycle at) {
  if (fail_prob_a_ > 0.0 && u.rng.bernoulli(fail_prob_a_)) {
    ++failed_attempts_;
    schedule(unit, at + round_length_);
    return;
  }
  u.holding = true;
  u.ready_cycle = at + opts_.handoff_latency;
  ++buffer_.count;
  ++buffer_.produced_total;
  ++produced_this_cycle_;
}

void ProductionBank::assign(int unit, double angle) {
  Unit& u = units_[static_cast<std::size_t>(unit)];
  u.assigned = true;
  u.holding = false;
  u.angle = angle;
  schedule(unit, cycle_ + round_length_);
}

int ProductionBank::request(int n, std::optional<double> angle) {
  if (n < 1) {
    throw InvariantViolation("request_states needs n >= 1");
  }
  const bool rz = mechanism() == Mechanism::rz_synthesis;
  if (rz != angle.has_value()) {
    throw InvariantViolation(rz ? "Rz request without an angle" : "angle given to a non-Rz bank");
  }

  if (!rz) {
    const auto granted = static_cast<int>(std::min<std::int64_t>(n, consumable_));
    consumable_ -= granted;
    buffer_.count -= granted;
    buffer_.consumed_total += granted;
    return granted;
  }

  const double want = canonicalize_angle(*angle);
  int granted = 0;
  for (int i = 0; i < unit_count() && granted < n; ++i) {
    Unit& u = units_[static_cast<std::size_t>(i)];
    if (u.holding && u.ready_cycle <= cycle_ && angles_equal(u.angle, want)) {
      ++granted;
      --buffer_.count;
      ++buffer_.consumed_total;
      u.holding = false;
      u.assigned = false;
      if (!demand_queue_.empty()) {
        assign(i, demand_queue_.front());
        demand_queue_.pop_front();
      }
    }
  }
  return granted;
}

bool ProductionBank::register_demand(double angle, Cycle /*cycle*/) {
  if (mechanism() != Mechanism::rz_synthesis) {
    throw InvariantViolation("register_demand on a non-Rz bank");
  }
  const double a = canonicalize_angle(angle);
  for (int i = 0; i < unit_count(); ++i) {
    if (!units_[static_cast<std::size_t>(i)].assigned) {
      assign(i, a);
      return true;
    }
  }
  demand_queue_.push_back(a);
  return false;
}

std::int64_t ProductionBank::consumable() const {
  if (mechanism() != Mechanism::rz_synthesis) {
    return consumable_;
  }
  std::int64_t n = 0;
  for (const Unit& u : units_) {
    n += u.holding && u.ready_cycle <= cycle_ ? 1 : 0;
  }
  return n;
}

int ProductionBank::busy_units() const {
  int n = 0;
  for (const Unit& u : units_) {
    n += u.assigned ? 1 : 0;
  }
  return n;
}

bool ProductionBank::can_ever_produce() const {
  if (units_.empty()) {
    return false;
  }
  if (mechanism() == Mechanism::cultivation && buffer_.capacity && *buffer_.capacity == 0) {
    return false;
  }
  return fail_prob_a_ < 1.0 && fail_prob_b_ < 1.0;
}

std::vector<Cycle> ProductionBank::start_offsets() const {
  std::vector<Cycle> out;
  out.reserve(units_.size());
  for (const Unit& u : units_) {
    out.push_back(u.offset);
  }
  return out;
}

void ProductionBank::check_invariants() const {
  auto fail = [](const std::string& msg) { throw InvariantViolation("production bank: " + msg); };
  if (buffer_.count < 0 || consumable_ < 0) {
    fail("negative buffer count");
  }
  if (buffer_.count != buffer_.produced_total - buffer_.consumed_total) {
    fail("count != produced_total - consumed_total");
  }
  if (buffer_.consumed_total > buffer_.produced_total) {
    fail("consumed more than produced");
  }
  if (buffer_.capacity && buffer_.count > *buffer_.capacity) {
    fail("buffer above capacity");
  }
  if (mechanism() == Mechanism::rz_synthesis) {
    std::int64_t held = 0;
    for (const Unit& u : units_) {
      if (u.holding && !u.assigned) {
        fail("unassigned unit holds a state");
      }
      held += u.holding ? 1 : 0;
    }
    if (held != buffer_.count) {
      fail("held Rz states do not match buffer count");
    }
    if (!demand_queue_.empty() && busy_units() < unit_count()) {
      fail("demand queued while a unit is idle");
    }
  } else {
    std::int64_t transit = 0;
    for (const auto& [ready, n] : in_transit_) {
      transit += n;
    }
    if (consumable_ + transit != buffer_.count) {
      fail("consumable + in-transit states do not match buffer count");
    }
  }
}

}  // namespace magicsim
