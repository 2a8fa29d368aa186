#include "magicsim/scheduler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "magicsim/angle.h"
#include "magicsim/errors.h"
#include "magicsim/lowering.h"
#include "magicsim/metrics.h"
#include "magicsim/profile.h"

namespace magicsim {

std::string to_string(SimulationMode m) {
  switch (m) {
    case SimulationMode::A:
      return "A";
    case SimulationMode::B:
      return "B";
    case SimulationMode::C:
      return "C";
    case SimulationMode::D:
      return "D";
  }
  return "?";
}

SimulationMode parse_mode(const std::string& name) {
  if (name == "A" || name == "a") {
    return SimulationMode::A;
  }
  if (name == "B" || name == "b") {
    return SimulationMode::B;
  }
  if (name == "C" || name == "c") {
    return SimulationMode::C;
  }
  if (name == "D" || name == "d") {
    return SimulationMode::D;
  }
  throw ConfigError("unknown mode '" + name + "' (expected A, B, C or D)");
}

bool production_is_stochastic(SimulationMode m) {
  return m == SimulationMode::B || m == SimulationMode::D;
}

bool injection_can_fail(SimulationMode m) {
  return m == SimulationMode::C || m == SimulationMode::D;
}

std::string to_string(PriorityUpdate p) { return p == PriorityUpdate::full ? "full" : "static"; }

PriorityUpdate parse_priority_update(const std::string& name) {
  if (name == "full") {
    return PriorityUpdate::full;
  }
  if (name == "static") {
    return PriorityUpdate::fixed;
  }
  throw ConfigError("unknown priority update '" + name + "' (expected static or full)");
}

std::string rz_handling_name(int rz_expand) {
  return rz_expand == 0 ? "as-one-state" : "expand:" + std::to_string(rz_expand);
}

int parse_rz_handling(const std::string& text) {
  if (text == "as-one-state") {
    return 0;
  }
  const std::string prefix = "expand:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == rest.size() && !rest.empty() && n >= 1) {
      return n;
    }
  }
  throw ConfigError("invalid rz handling '" + text + "' (expected as-one-state or expand:n, n >= 1)");
}

void validate(const SimConfig& cfg) {
  validate(cfg.mechanism);
  if (cfg.F < 0) {
    throw ConfigError("F must be >= 0");
  }
  if (cfg.rz_expand < 0) {
    throw ConfigError("rz expansion count must be >= 1");
  }
  if (cfg.rz_expand > 0 && mechanism_of(cfg.mechanism) == Mechanism::rz_synthesis) {
    throw ConfigError("rz handling applies only to distillation and cultivation");
  }
  if (cfg.max_cycles < 1) {
    throw ConfigError("max_cycles must be >= 1");
  }
  if (cfg.handoff_latency < 0) {
    throw ConfigError("handoff latency must be >= 0");
  }
  if (cfg.fixup_duration < 1) {
    throw ConfigError("fixup duration must be >= 1");
  }
  for (const auto& [key, value] : cfg.durations) {
    static const char* const kKeys[] = {"clifford", "t", "tdg", "rz", "measure"};
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError("unknown duration key '" + key + "' (expected clifford, t, tdg, rz, measure)");
    }
    if (value < 1) {
      throw ConfigError("duration for '" + key + "' must be >= 1");
    }
  }
  if (cfg.cost_per_logical_qubit && !(*cfg.cost_per_logical_qubit > 0.0)) {
    throw ConfigError("cost per logical qubit must be > 0");
  }
}

bool sample_injection(std::uint64_t trial_seed, NodeId node) {
  RandomStream rng(derive_seed(derive_seed(trial_seed, StreamKey::injection),
                               static_cast<std::uint64_t>(node)));
  return !rng.bernoulli(0.5);
}

GateKind fixup_kind(const GateKind& kind, bool rz_mechanism) {
  const double angle = injection_angle(kind);
  if (std::holds_alternative<gate::RzInjection>(kind) && !rz_mechanism) {
    return gate::FixupClifford{"s"};
  }
  const double doubled = doubled_angle(angle);
  const int turns = clifford_quarter_turns(doubled);
  if (turns >= 0) {
    return gate::FixupClifford{clifford_rotation_name(turns)};
  }
  return gate::RzInjection{doubled};
}

namespace {

std::int64_t max_successor_priority(const CircuitDag& dag, NodeId id) {
  std::int64_t best = 0;
  for (NodeId s : dag.successors(id)) {
    best = std::max(best, dag.node(s).priority);
  }
  return best;
}

}  // namespace

NodeId insert_fixup(CircuitDag& dag, NodeId after, GateKind kind, int duration,
                    PriorityUpdate update) {
  const NodeId f = dag.splice_after(after, std::move(kind), duration, NodeOrigin::fixup);
  dag.node(f).priority = duration + max_successor_priority(dag, f);
  if (update == PriorityUpdate::full) {
    std::vector<NodeId> work{after};
    while (!work.empty()) {
      const NodeId id = work.back();
      work.pop_back();
      GateNode& n = dag.node(id);
      const std::int64_t p = n.duration + max_successor_priority(dag, id);
      if (p == n.priority) {
        continue;
      }
      n.priority = p;
      for (NodeId pred : dag.predecessors(id)) {
        work.push_back(pred);
      }
    }
  }
  return f;
}

CircuitDag prepare_circuit(const CircuitDag& dag, const SimConfig& cfg) {
  CircuitDag out = cfg.rz_expand > 0 ? expand_rz(dag, cfg.rz_expand) : dag;
  for (GateNode& n : out.nodes()) {
    if (std::holds_alternative<gate::Composite>(n.kind)) {
      throw InputError("gate '" + std::get<gate::Composite>(n.kind).name +
                       "' must be lowered before simulation");
    }
    const char* key = std::visit(overloaded{
                                     [](const gate::Clifford&) { return "clifford"; },
                                     [](const gate::TInjection& t) { return t.dagger ? "tdg" : "t"; },
                                     [](const gate::RzInjection&) { return "rz"; },
                                     [](const gate::Measure&) { return "measure"; },
                                     [](const auto&) { return ""; },
                                 },
                                 n.kind);
    if (const auto it = cfg.durations.find(key); it != cfg.durations.end()) {
      n.duration = it->second;
    }
  }
  assign_priorities(out);
  return out;
}

namespace {

class Simulation {
 public:
  Simulation(const CircuitDag& dag, const SimConfig& cfg)
      : cfg_(cfg),
        dag_(prepare_circuit(dag, cfg)),
        rz_mechanism_(mechanism_of(cfg.mechanism) == Mechanism::rz_synthesis),
        inject_errors_(injection_can_fail(cfg.mode)),
        bank_(cfg.mechanism, cfg.unlimited_supply ? 0 : cfg.F,
              derive_seed(cfg.trial_seed, StreamKey::production),
              BankOptions{!production_is_stochastic(cfg.mode), cfg.handoff_latency}),
        first_supply_(minimum_latency(cfg.mechanism) + cfg.handoff_latency),
        qubit_owner_(static_cast<std::size_t>(dag_.qubit_count()), -1) {
    const std::size_t n = dag_.size();
    remaining_preds_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      remaining_preds_[i] = static_cast<int>(dag_.predecessors(static_cast<NodeId>(i)).size());
      if (remaining_preds_[i] == 0) {
        make_ready(static_cast<NodeId>(i), 0);
      }
    }
    stall_since_.assign(n, -1);
    if (cfg_.check_invariants) {
      rank_.assign(n, 0.0);
      rebuild_ranks();
    }
  }

  SimResult run() {
    SimResult r;
    r.trial_seed = cfg_.trial_seed;
    std::size_t done = 0;
    Cycle cycle = 0;
    while (done < dag_.size()) {
      ++cycle;
      if (cycle > cfg_.max_cycles) {
        throw SimulationError("cycle limit " + std::to_string(cfg_.max_cycles) + " exceeded" +
                              stalled_description());
      }
      if (!cfg_.unlimited_supply) {
        bank_.step(cycle);
      }
      demand_.push_back(0);
      stalls_.push_back(0);
      done += dispatch(cycle);
      done += retire(cycle);
      if (rz_mechanism_) {
        r.max_concurrent_rz_units = std::max(r.max_concurrent_rz_units, bank_.busy_units());
      }
      if (cfg_.check_invariants) {
        bank_.check_invariants();
        ++checks_;
      }
      if (stalls_.back() > 0 && !cfg_.unlimited_supply && !bank_.can_ever_produce()) {
        throw SimulationError("deadlock: no production unit can ever supply a state" +
                              stalled_description());
      }
    }

    r.cycles = last_finish_;
    demand_.resize(static_cast<std::size_t>(r.cycles));
    stalls_.resize(static_cast<std::size_t>(r.cycles));
    r.demand_trace = std::move(demand_);
    r.stall_trace = std::move(stalls_);
    for (int d : r.demand_trace) {
      r.peak_demand = std::max(r.peak_demand, d);
    }
    for (int s : r.stall_trace) {
      r.stall_count += s;
    }
    r.injection_count = injections_;
    r.fixup_count = fixups_;
    r.abort_count = bank_.failed_attempts();
    r.node_count = static_cast<std::int64_t>(dag_.size());

    const CostModel cm =
        CostModel::preset(cfg_.mechanism, cfg_.cost_units, cfg_.cost_per_logical_qubit);
    r.q_total = q_total(dag_.qubit_count(), cfg_.F, cm);
    r.volume = space_time_volume(r.cycles, r.q_total);
    r.invariant_checks = checks_;
    return r;
  }

 private:
  struct Running {
    Cycle finish;
    NodeId id;
    bool operator>(const Running& o) const {
      return finish != o.finish ? finish > o.finish : id > o.id;
    }
  };

  // Rz demands are registered when a node becomes ready, so every queued
  // demand belongs to a node that can start as soon as its state arrives.
  void make_ready(NodeId id, Cycle cycle) {
    ready_.push_back(id);
    note_ready(id, cycle);
  }

  void note_ready(NodeId id, Cycle cycle) {
    if (rz_mechanism_ && !cfg_.unlimited_supply && is_injection(dag_.node(id).kind)) {
      bank_.register_demand(injection_angle(dag_.node(id).kind), cycle);
    }
  }

  // Topological ranks; every edge must go from a lower to a higher rank.
  void rebuild_ranks() {
    const auto order = dag_.topological_order();
    rank_.assign(dag_.size(), 0.0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      rank_[static_cast<std::size_t>(order[i])] = static_cast<double>(i);
    }
  }

  // Acyclicity after splicing f: only f's edges are new, so checking their
  // ranks is enough. Falls back to a full check when ranks run out of room.
  void check_spliced(NodeId f) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (NodeId p : dag_.predecessors(f)) {
      lo = std::max(lo, rank_[static_cast<std::size_t>(p)]);
    }
    for (NodeId s : dag_.successors(f)) {
      hi = std::min(hi, rank_[static_cast<std::size_t>(s)]);
    }
    double r = std::isinf(hi) ? lo + 1.0 : (std::isinf(lo) ? hi - 1.0 : lo + (hi - lo) / 2.0);
    rank_.push_back(r);
    if (lo < r && r < hi) {
      return;
    }
    if (!dag_.is_acyclic()) {
      throw InvariantViolation("dependency graph has a cycle after inserting fixup " + std::to_string(f));
    }
    rebuild_ranks();
  }

  int request_state(const GateNode& n, Cycle cycle) {
    if (cfg_.unlimited_supply) {
      return cycle >= first_supply_ ? 1 : 0;
    }
    if (rz_mechanism_) {
      return bank_.request(1, injection_angle(n.kind));
    }
    return bank_.request(1);
  }

  // Starts ready nodes in priority order; returns zero-duration completions.
  std::size_t dispatch(Cycle cycle) {
    auto lower = [this](NodeId a, NodeId b) {
      const auto pa = dag_.node(a).priority;
      const auto pb = dag_.node(b).priority;
      return pa != pb ? pa < pb : a > b;
    };
    std::priority_queue<NodeId, std::vector<NodeId>, decltype(lower)> heap(lower,
                                                                           std::move(ready_));
    ready_.clear();
    std::size_t completed = 0;
    while (!heap.empty()) {
      const NodeId id = heap.top();
      heap.pop();
      const GateNode& n = dag_.node(id);
      if (n.duration == 0) {
        ++completed;
        for (NodeId s : dag_.successors(id)) {
          if (--remaining_preds_[static_cast<std::size_t>(s)] == 0) {
            heap.push(s);
            note_ready(s, cycle);
          }
        }
        continue;
      }
      if (is_injection(n.kind)) {
        if (request_state(n, cycle) == 0) {
          ++stalls_.back();
          if (stall_since_[static_cast<std::size_t>(id)] < 0) {
            stall_since_[static_cast<std::size_t>(id)] = cycle;
          }
          ready_.push_back(id);
          continue;
        }
        ++demand_.back();
        ++injections_;
      }
      start(n, cycle);
    }
    return completed;
  }

  void start(const GateNode& n, Cycle cycle) {
    if (cfg_.check_invariants) {
      for (int q : n.qubits) {
        if (qubit_owner_[static_cast<std::size_t>(q)] >= 0) {
          throw InvariantViolation("qubit " + std::to_string(q) + " used by node " +
                                   std::to_string(n.id) + " while node " +
                                   std::to_string(qubit_owner_[static_cast<std::size_t>(q)]) +
                                   " is in flight");
        }
        qubit_owner_[static_cast<std::size_t>(q)] = n.id;
      }
      ++checks_;
    }
    running_.push(Running{cycle + n.duration - 1, n.id});
  }

  // Completes nodes finishing this cycle; returns how many.
  std::size_t retire(Cycle cycle) {
    std::size_t completed = 0;
    while (!running_.empty() && running_.top().finish == cycle) {
      const NodeId id = running_.top().id;
      running_.pop();
      ++completed;
      last_finish_ = cycle;
      if (cfg_.check_invariants) {
        for (int q : dag_.node(id).qubits) {
          qubit_owner_[static_cast<std::size_t>(q)] = -1;
        }
      }
      if (is_injection(dag_.node(id).kind) && inject_errors_ &&
          !sample_injection(cfg_.trial_seed, id)) {
        add_fixup(id, cycle);
        continue;
      }
      for (NodeId s : dag_.successors(id)) {
        if (--remaining_preds_[static_cast<std::size_t>(s)] == 0) {
          make_ready(s, cycle);
        }
      }
    }
    return completed;
  }

  void add_fixup(NodeId after, Cycle cycle) {
    ++fixups_;
    GateKind kind = fixup_kind(dag_.node(after).kind, rz_mechanism_);
    int duration = cfg_.fixup_duration;
    if (std::holds_alternative<gate::RzInjection>(kind)) {
      const auto it = cfg_.durations.find("rz");
      duration = it != cfg_.durations.end() ? it->second : 1;
    }
    const NodeId f = insert_fixup(dag_, after, std::move(kind), duration, cfg_.priority_update);
    remaining_preds_.push_back(0);
    stall_since_.push_back(-1);
    make_ready(f, cycle);
    if (cfg_.check_invariants) {
      check_spliced(f);
      ++checks_;
    }
  }

  std::string stalled_description() const {
    NodeId oldest = -1;
    for (NodeId id : ready_) {
      const Cycle since = stall_since_[static_cast<std::size_t>(id)];
      if (since < 0) {
        continue;
      }
      if (oldest < 0 || since < stall_since_[static_cast<std::size_t>(oldest)] ||
          (since == stall_since_[static_cast<std::size_t>(oldest)] && id < oldest)) {
        oldest = id;
      }
    }
    if (oldest < 0) {
      return "";
    }
    const GateNode& n = dag_.node(oldest);
    std::ostringstream out;
    out << "; oldest stalled node " << oldest << " (" << kind_name(n.kind) << " on qubit";
    for (int q : n.qubits) {
      out << ' ' << q;
    }
    out << ") waiting since cycle " << stall_since_[static_cast<std::size_t>(oldest)];
    return out.str();
  }

  const SimConfig& cfg_;
  CircuitDag dag_;
  bool rz_mechanism_;
  bool inject_errors_;
  ProductionBank bank_;
  Cycle first_supply_;
  std::vector<int> remaining_preds_;
  std::vector<Cycle> stall_since_;
  std::vector<double> rank_;
  std::vector<NodeId> ready_;
  std::priority_queue<Running, std::vector<Running>, std::greater<>> running_;
  std::vector<NodeId> qubit_owner_;
  std::vector<int> demand_;
  std::vector<int> stalls_;
  std::int64_t injections_ = 0;
  std::int64_t fixups_ = 0;
  std::int64_t checks_ = 0;
  Cycle last_finish_ = 0;
};

}  // namespace

SimResult simulate(const CircuitDag& dag, const SimConfig& cfg) {
  validate(cfg);
  return Simulation(dag, cfg).run();
}

Cycle static_cycle_count(const CircuitDag& dag, const SimConfig& cfg) {
  SimConfig ref = cfg;
  ref.mode = SimulationMode::A;
  ref.unlimited_supply = true;
  ref.check_invariants = false;
  return simulate(dag, ref).cycles;
}

const std::vector<int>& demand_trace(const SimResult& result) { return result.demand_trace; }

std::string trace_csv(const SimResult& result) {
  std::ostringstream out;
  out << "cycle,consumed,stalled\n";
  for (std::size_t i = 0; i < result.demand_trace.size(); ++i) {
    out << (i + 1) << ',' << result.demand_trace[i] << ',' << result.stall_trace[i] << '\n';
  }
  return out.str();
}

}  // namespace magicsim
