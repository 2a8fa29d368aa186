#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "magicsim/angle.h"
#include "magicsim/metrics.h"
#include "magicsim/profile.h"
#include "magicsim/scheduler.h"
#include "magicsim/sweep.h"
#include "support/generators.h"

using namespace magicsim;
using magicsim::testing::random_circuit;

namespace {

constexpr SimulationMode kModes[] = {SimulationMode::A, SimulationMode::B, SimulationMode::C,
                                     SimulationMode::D};

MechanismConfig fast_mechanism(Mechanism m) {
  switch (m) {
    case Mechanism::distillation: {
      DistillationConfig d;
      d.t_prod = 4;
      d.abort_rate = 0.2;
      return d;
    }
    case Mechanism::cultivation: {
      CultivationConfig c;
      c.q1 = 0.1;
      c.q2 = 0.1;
      return c;
    }
    case Mechanism::rz_synthesis: {
      RzSynthConfig r;
      r.q_round = 0.3;
      return r;
    }
  }
  return DistillationConfig{};
}

// Random circuit with some of its T gates turned into non-Clifford rz.
CircuitDag with_rotations(RandomStream& rng, int nodes, int qubits) {
  const auto base = random_circuit(rng, nodes, qubits);
  CircuitDag dag(base.dag.qubit_count());
  for (const GateNode& n : base.dag.nodes()) {
    GateKind k = n.kind;
    if (is_injection(k) && rng.bernoulli(0.5)) {
      k = gate::RzInjection{(1 + 2 * static_cast<double>(rng.next() % 8)) * kPi / 16};
    }
    dag.append(k, n.qubits, n.duration);
  }
  return dag;
}

void expect_result_invariants(const CircuitDag& dag, const SimConfig& cfg, const SimResult& r) {
  ASSERT_EQ(r.demand_trace.size(), static_cast<std::size_t>(r.cycles));
  ASSERT_EQ(r.stall_trace.size(), static_cast<std::size_t>(r.cycles));
  EXPECT_EQ(r.volume, r.q_total * static_cast<double>(r.cycles));
  EXPECT_EQ(std::accumulate(r.demand_trace.begin(), r.demand_trace.end(), std::int64_t{0}),
            r.injection_count);
  EXPECT_EQ(std::accumulate(r.stall_trace.begin(), r.stall_trace.end(), std::int64_t{0}),
            r.stall_count);
  const int peak = r.demand_trace.empty()
                       ? 0
                       : *std::max_element(r.demand_trace.begin(), r.demand_trace.end());
  EXPECT_EQ(r.peak_demand, peak);
  EXPECT_EQ(r.node_count, static_cast<std::int64_t>(dag.size()) + r.fixup_count);
  const CostModel cm =
      CostModel::preset(cfg.mechanism, cfg.cost_units, cfg.cost_per_logical_qubit);
  EXPECT_EQ(r.q_total, q_total(dag.qubit_count(), cfg.F, cm));
  if (!injection_can_fail(cfg.mode)) {
    EXPECT_EQ(r.fixup_count, 0);
  }
  if (!production_is_stochastic(cfg.mode)) {
    EXPECT_EQ(r.abort_count, 0);
  }
}

}  // namespace

TEST(Property, RandomCircuitsAllModesAndMechanisms) {
  RandomStream rng(4242);
  for (int i = 0; i < 60; ++i) {
    const CircuitDag dag = with_rotations(rng, 14, 4);
    for (Mechanism m : {Mechanism::distillation, Mechanism::cultivation, Mechanism::rz_synthesis}) {
      for (SimulationMode mode : kModes) {
        SimConfig cfg;
        cfg.mechanism = fast_mechanism(m);
        cfg.F = 1 + static_cast<int>(rng.next() % 4);
        cfg.mode = mode;
        cfg.trial_seed = rng.next();
        cfg.check_invariants = true;
        const SimResult r = simulate(dag, cfg);
        EXPECT_GT(r.invariant_checks, 0);
        expect_result_invariants(dag, cfg, r);
        if (HasFailure()) {
          FAIL() << "circuit " << i << " " << to_string(m) << " mode " << to_string(mode);
        }
      }
    }
  }
}

TEST(Property, FixupsMatchSampledFailures) {
  // Under distillation every fixup is a Clifford, so failures are exactly the
  // static injections whose coin comes up tails.
  RandomStream rng(99);
  for (int i = 0; i < 100; ++i) {
    const auto c = random_circuit(rng, 16, 4);
    SimConfig cfg;
    cfg.mechanism = fast_mechanism(Mechanism::distillation);
    cfg.F = 2;
    cfg.mode = SimulationMode::D;
    cfg.trial_seed = rng.next();
    const SimResult r = simulate(c.dag, cfg);
    std::int64_t expected = 0;
    std::int64_t injections = 0;
    for (const GateNode& n : c.dag.nodes()) {
      if (is_injection(n.kind)) {
        ++injections;
        expected += sample_injection(cfg.trial_seed, n.id) ? 0 : 1;
      }
    }
    EXPECT_EQ(r.fixup_count, expected);
    EXPECT_EQ(r.injection_count, injections);
  }
}

TEST(Property, RzFixupCascadeCounts) {
  // Each failed rz(theta) adds rz(2 theta) until the angle turns Clifford.
  RandomStream rng(7);
  for (int i = 0; i < 100; ++i) {
    CircuitDag dag(2);
    const int n = 1 + static_cast<int>(rng.next() % 5);
    for (int k = 0; k < n; ++k) {
      dag.append(gate::RzInjection{(1 + 2 * static_cast<double>(rng.next() % 4)) * kPi / 16},
                 {static_cast<int>(rng.next() % 2)}, 1);
    }
    SimConfig cfg;
    cfg.mechanism = fast_mechanism(Mechanism::rz_synthesis);
    cfg.F = 2;
    cfg.mode = SimulationMode::C;
    cfg.trial_seed = rng.next();
    const SimResult r = simulate(dag, cfg);
    // Fixup ids follow retirement order, so only totals are checked, against
    // the chain length bounds.
    EXPECT_GE(r.injection_count, n);
    EXPECT_LE(r.injection_count, 3 * n);  // pi/16 -> pi/8 -> pi/4 -> Clifford
    EXPECT_LE(r.fixup_count, 3 * n);
    EXPECT_EQ(r.node_count, n + r.fixup_count);
    // Every failed injection is followed by exactly one fixup; the last link
    // of a chain is either a success or a Clifford fixup.
    EXPECT_GE(r.fixup_count, r.injection_count - n);
  }
}

TEST(Property, PriorityUpdatePoliciesAgree) {
  RandomStream rng(123);
  for (int i = 0; i < 60; ++i) {
    const CircuitDag dag = with_rotations(rng, 14, 4);
    for (Mechanism m : {Mechanism::distillation, Mechanism::rz_synthesis}) {
      SimConfig cfg;
      cfg.mechanism = fast_mechanism(m);
      cfg.F = 2;
      cfg.mode = SimulationMode::D;
      cfg.trial_seed = rng.next();
      cfg.priority_update = PriorityUpdate::full;
      const SimResult full = simulate(dag, cfg);
      cfg.priority_update = PriorityUpdate::fixed;
      const SimResult fixed = simulate(dag, cfg);
      EXPECT_EQ(full.cycles, fixed.cycles);
      EXPECT_EQ(full.demand_trace, fixed.demand_trace);
      EXPECT_EQ(full.stall_trace, fixed.stall_trace);
    }
  }
}

TEST(Property, ReproducibleFromSeed) {
  RandomStream rng(8);
  for (int i = 0; i < 20; ++i) {
    const CircuitDag dag = with_rotations(rng, 14, 4);
    for (Mechanism m : {Mechanism::distillation, Mechanism::cultivation, Mechanism::rz_synthesis}) {
      SimConfig cfg;
      cfg.mechanism = fast_mechanism(m);
      cfg.F = 2;
      cfg.trial_seed = rng.next();
      const SimResult a = simulate(dag, cfg);
      const SimResult b = simulate(dag, cfg);
      EXPECT_EQ(a.cycles, b.cycles);
      EXPECT_EQ(a.demand_trace, b.demand_trace);
      EXPECT_EQ(a.stall_trace, b.stall_trace);
      EXPECT_EQ(a.fixup_count, b.fixup_count);
      EXPECT_EQ(a.abort_count, b.abort_count);
    }
  }
}

TEST(Property, AmpleModeAIsSeedIndependent) {
  const CircuitDag dag = magicsim::testing::bursty_circuit({8, 6, 3, 3});
  const StaticProfile p = static_profile(dag);
  SimConfig cfg;
  cfg.mode = SimulationMode::A;
  cfg.F = p.gamma_peak * 18;
  Cycle first = -1;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.trial_seed = seed * 7919;
    const Cycle c = simulate(dag, cfg).cycles;
    if (first < 0) {
      first = c;
    }
    EXPECT_EQ(c, first);
  }
  EXPECT_EQ(first, static_cycle_count(dag, cfg));
}

TEST(Property, ModesOnlyAddDelay) {
  const CircuitDag dag = magicsim::testing::bursty_circuit({8, 6, 3, 4});
  for (Mechanism m : {Mechanism::distillation, Mechanism::cultivation}) {
    SimConfig cfg;
    cfg.mechanism = fast_mechanism(m);
    cfg.F = 5;
    double mean[4] = {};
    for (int k = 0; k < 4; ++k) {
      cfg.mode = kModes[k];
      std::vector<SimResult> runs;
      for (int t = 0; t < 100; ++t) {
        cfg.trial_seed = sweep_trial_seed(17, cfg.F, t);
        runs.push_back(simulate(dag, cfg));
      }
      mean[k] = aggregate_trials(runs).cycles.mean;
    }
    const double a = mean[0], b = mean[1], c = mean[2], d = mean[3];
    EXPECT_GE(b, a * 0.99) << to_string(m);
    EXPECT_GE(d, b * 0.99) << to_string(m);
    EXPECT_GE(d, c * 0.99) << to_string(m);
    EXPECT_GE(c, a * 0.99) << to_string(m);
  }
}

TEST(Property, QTotalModeIndependentAndIncreasingInF) {
  const CircuitDag dag = magicsim::testing::bursty_circuit({6, 4, 2, 2});
  double last = 0.0;
  for (int F = 1; F <= 6; ++F) {
    double q = -1.0;
    for (SimulationMode mode : kModes) {
      SimConfig cfg;
      cfg.F = F;
      cfg.mode = mode;
      cfg.trial_seed = 3;
      const double qm = simulate(dag, cfg).q_total;
      if (q < 0.0) {
        q = qm;
      }
      EXPECT_EQ(qm, q);
    }
    EXPECT_GT(q, last);
    last = q;
  }
}

TEST(Property, SerialChainDemandNeverExceedsOne) {
  // Only one node can be in flight on a single-qubit chain.
  SimConfig cfg;
  cfg.F = 10;
  cfg.mode = SimulationMode::D;
  cfg.check_invariants = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    cfg.trial_seed = s;
    const SimResult r = simulate(magicsim::testing::serial_t_chain(30), cfg);
    EXPECT_LE(r.peak_demand, 1);
    EXPECT_EQ(r.injection_count, 30);
  }
}
