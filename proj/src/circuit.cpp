#include "magicsim/circuit.h"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

#include "magicsim/angle.h"
#include "magicsim/errors.h"

namespace magicsim {

bool is_injection(const GateKind& kind) {
  return std::holds_alternative<gate::TInjection>(kind) ||
         std::holds_alternative<gate::RzInjection>(kind);
}

double injection_angle(const GateKind& kind) {
  if (const auto* t = std::get_if<gate::TInjection>(&kind)) {
    return t->dagger ? kTdgAngle : kTAngle;
  }
  if (const auto* rz = std::get_if<gate::RzInjection>(&kind)) {
    return rz->angle;
  }
  throw std::logic_error("injection_angle: not an injection kind");
}

std::string kind_name(const GateKind& kind) {
  return std::visit(overloaded{
                        [](const gate::Clifford& c) { return c.name; },
                        [](const gate::TInjection& t) { return std::string(t.dagger ? "tdg" : "t"); },
                        [](const gate::RzInjection& rz) {
                          std::ostringstream os;
                          os.precision(17);
                          os << "rz(" << rz.angle << ")";
                          return os.str();
                        },
                        [](const gate::FixupClifford& f) { return "fixup:" + f.name; },
                        [](const gate::Measure&) { return std::string("measure"); },
                        [](const gate::Barrier&) { return std::string("barrier"); },
                        [](const gate::Composite& c) { return c.name; },
                    },
                    kind);
}

CircuitDag::CircuitDag(int qubit_count) : qubit_count_(qubit_count) {
  if (qubit_count < 0) {
    throw InputError("negative qubit count");
  }
  last_on_qubit_.assign(static_cast<std::size_t>(qubit_count), -1);
}

void CircuitDag::add_edge(NodeId from, NodeId to) {
  auto& out = succ_[static_cast<std::size_t>(from)];
  if (std::find(out.begin(), out.end(), to) != out.end()) {
    return;
  }
  out.push_back(to);
  pred_[static_cast<std::size_t>(to)].push_back(from);
}

NodeId CircuitDag::append(GateKind kind, std::vector<int> qubits, int duration, NodeOrigin origin) {
  const bool barrier = std::holds_alternative<gate::Barrier>(kind);
  if (barrier ? duration != 0 : duration < 1) {
    throw InputError("invalid duration " + std::to_string(duration) + " for " + kind_name(kind));
  }
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (qubits[i] < 0 || qubits[i] >= qubit_count_) {
      throw InputError("qubit index " + std::to_string(qubits[i]) + " out of range for " +
                       std::to_string(qubit_count_) + " qubits");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (qubits[i] == qubits[j]) {
        throw InputError("duplicate qubit operand " + std::to_string(qubits[i]) + " in " +
                         kind_name(kind));
      }
    }
  }

  const NodeId id = next_id();
  nodes_.push_back(GateNode{id, std::move(kind), std::move(qubits), duration, 0, origin});
  succ_.emplace_back();
  pred_.emplace_back();
  for (int q : nodes_.back().qubits) {
    NodeId& last = last_on_qubit_[static_cast<std::size_t>(q)];
    if (last >= 0) {
      add_edge(last, id);
    }
    last = id;
  }
  return id;
}

NodeId CircuitDag::splice_after(NodeId after, GateKind kind, int duration, NodeOrigin origin) {
  if (duration < 1) {
    throw InputError("spliced node needs a positive duration");
  }
  const NodeId id = next_id();
  std::vector<int> qubits = node(after).qubits;
  nodes_.push_back(GateNode{id, std::move(kind), qubits, duration, 0, origin});
  succ_.emplace_back();
  pred_.emplace_back();

  auto& after_out = succ_[static_cast<std::size_t>(after)];
  std::vector<NodeId> moved = std::move(after_out);
  after_out.clear();
  for (NodeId s : moved) {
    for (NodeId& p : pred_[static_cast<std::size_t>(s)]) {
      if (p == after) {
        p = id;
      }
    }
  }
  succ_[static_cast<std::size_t>(id)] = std::move(moved);
  add_edge(after, id);

  for (int q : qubits) {
    NodeId& last = last_on_qubit_[static_cast<std::size_t>(q)];
    if (last == after) {
      last = id;
    }
  }
  return id;
}

std::vector<std::pair<NodeId, NodeId>> CircuitDag::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t u = 0; u < succ_.size(); ++u) {
    for (NodeId v : succ_[u]) {
      out.emplace_back(static_cast<NodeId>(u), v);
    }
  }
  return out;
}

std::size_t CircuitDag::edge_count() const {
  std::size_t n = 0;
  for (const auto& s : succ_) {
    n += s.size();
  }
  return n;
}

std::vector<NodeId> CircuitDag::topological_order() const {
  std::vector<std::size_t> indegree(nodes_.size());
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    indegree[v] = pred_[v].size();
  }
  // Smallest ready id first, so static circuits come back in source order.
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> frontier;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (indegree[v] == 0) {
      frontier.push(static_cast<NodeId>(v));
    }
  }
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  while (!frontier.empty()) {
    const NodeId u = frontier.top();
    frontier.pop();
    order.push_back(u);
    for (NodeId v : succ_[static_cast<std::size_t>(u)]) {
      if (--indegree[static_cast<std::size_t>(v)] == 0) {
        frontier.push(v);
      }
    }
  }
  if (order.size() != nodes_.size()) {
    throw InvariantViolation("dependency graph contains a cycle");
  }
  return order;
}

bool CircuitDag::is_acyclic() const {
  try {
    topological_order();
    return true;
  } catch (const InvariantViolation&) {
    return false;
  }
}

std::vector<NodeId> CircuitDag::nodes_on_qubit(int qubit) const {
  std::vector<NodeId> out;
  for (NodeId id : topological_order()) {
    const auto& qs = node(id).qubits;
    if (std::find(qs.begin(), qs.end(), qubit) != qs.end()) {
      out.push_back(id);
    }
  }
  return out;
}

bool CircuitDag::reachable(NodeId from, NodeId to) const {
  if (from == to) {
    return true;
  }
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{from};
  seen[static_cast<std::size_t>(from)] = true;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : succ_[static_cast<std::size_t>(u)]) {
      if (v == to) {
        return true;
      }
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        stack.push_back(v);
      }
    }
  }
  return false;
}

}  // namespace magicsim
