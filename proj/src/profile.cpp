#include "magicsim/profile.h"

#include <algorithm>
#include <cmath>

namespace magicsim {

std::vector<std::int64_t> longest_path_priorities(const CircuitDag& dag) {
  const auto order = dag.topological_order();
  std::vector<std::int64_t> priority(dag.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::int64_t best = 0;
    for (NodeId s : dag.successors(*it)) {
      best = std::max(best, priority[static_cast<std::size_t>(s)]);
    }
    priority[static_cast<std::size_t>(*it)] = dag.node(*it).duration + best;
  }
  return priority;
}

void assign_priorities(CircuitDag& dag) {
  const auto priority = longest_path_priorities(dag);
  for (GateNode& n : dag.nodes()) {
    n.priority = priority[static_cast<std::size_t>(n.id)];
  }
}

std::vector<std::int64_t> asap_start_cycles(const CircuitDag& dag) {
  std::vector<std::int64_t> start(dag.size(), 0);
  for (NodeId id : dag.topological_order()) {
    std::int64_t s = 0;
    for (NodeId p : dag.predecessors(id)) {
      s = std::max(s, start[static_cast<std::size_t>(p)] + dag.node(p).duration);
    }
    start[static_cast<std::size_t>(id)] = s;
  }
  return start;
}

std::vector<NodeId> critical_path(const CircuitDag& dag) {
  if (dag.empty()) {
    return {};
  }
  const auto priority = longest_path_priorities(dag);
  auto better = [&](NodeId a, NodeId b) {
    const auto pa = priority[static_cast<std::size_t>(a)];
    const auto pb = priority[static_cast<std::size_t>(b)];
    return pa != pb ? pa > pb : a < b;
  };

  NodeId current = -1;
  for (const GateNode& n : dag.nodes()) {
    if (dag.predecessors(n.id).empty() && (current < 0 || better(n.id, current))) {
      current = n.id;
    }
  }

  std::vector<NodeId> path;
  while (current >= 0) {
    if (dag.node(current).duration > 0) {
      path.push_back(current);
    }
    const std::int64_t remaining =
        priority[static_cast<std::size_t>(current)] - dag.node(current).duration;
    NodeId next = -1;
    for (NodeId s : dag.successors(current)) {
      if (priority[static_cast<std::size_t>(s)] == remaining && (next < 0 || s < next)) {
        next = s;
      }
    }
    current = next;
  }
  return path;
}

StaticProfile static_profile(const CircuitDag& dag) {
  StaticProfile profile;
  const auto start = asap_start_cycles(dag);

  for (const GateNode& n : dag.nodes()) {
    profile.depth_cycles =
        std::max(profile.depth_cycles, start[static_cast<std::size_t>(n.id)] + n.duration);
  }
  profile.per_layer_demand.assign(static_cast<std::size_t>(profile.depth_cycles), 0);
  for (const GateNode& n : dag.nodes()) {
    if (std::holds_alternative<gate::TInjection>(n.kind)) {
      ++profile.t_count;
    } else if (std::holds_alternative<gate::RzInjection>(n.kind)) {
      ++profile.rz_count;
    } else {
      continue;
    }
    ++profile.per_layer_demand[static_cast<std::size_t>(start[static_cast<std::size_t>(n.id)])];
  }

  const auto& demand = profile.per_layer_demand;
  if (!demand.empty()) {
    profile.gamma_peak = *std::max_element(demand.begin(), demand.end());
    const double layers = static_cast<double>(demand.size());
    profile.gamma_avg = static_cast<double>(profile.t_count + profile.rz_count) / layers;
    double var = 0.0;
    for (int d : demand) {
      var += (d - profile.gamma_avg) * (d - profile.gamma_avg);
    }
    var /= layers;
    if (profile.gamma_avg > 0.0) {
      profile.peak_to_mean = profile.gamma_peak / profile.gamma_avg;
      profile.demand_cv = std::sqrt(var) / profile.gamma_avg;
    }
  }

  const auto path = critical_path(dag);
  if (!path.empty()) {
    const auto non_clifford = std::count_if(path.begin(), path.end(), [&](NodeId id) {
      return is_injection(dag.node(id).kind);
    });
    profile.critical_path_ncd = static_cast<double>(non_clifford) / static_cast<double>(path.size());
  }
  return profile;
}

}  // namespace magicsim
