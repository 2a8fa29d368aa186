#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace magicsim {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

using NodeId = std::int64_t;
using Cycle = std::int64_t;

namespace gate {

struct Clifford {
  std::string name;
};

// T (dagger = false) or T-dagger injection; consumes one magic state.
struct TInjection {
  bool dagger = false;
};

// Non-Clifford rz rotation; angle canonicalized to [0, 2pi).
struct RzInjection {
  double angle = 0.0;
};

// S / S-dagger style correction inserted after a failed injection.
struct FixupClifford {
  std::string name;
};

struct Measure {};

struct Barrier {};

// A gate that still needs lowering through a decomposition table. Only
// present between parsing and lowering.
struct Composite {
  std::string name;
  std::vector<double> params;
};

}  // namespace gate

using GateKind = std::variant<gate::Clifford, gate::TInjection, gate::RzInjection,
                              gate::FixupClifford, gate::Measure, gate::Barrier, gate::Composite>;

enum class NodeOrigin { static_gate, fixup };

// Magic-state consuming kinds (T, T-dagger, non-Clifford rz).
bool is_injection(const GateKind& kind);
// Rotation angle implemented by an injection node (pi/4 for T, 7pi/4 for T-dagger).
double injection_angle(const GateKind& kind);
std::string kind_name(const GateKind& kind);

struct GateNode {
  NodeId id = 0;
  GateKind kind;
  std::vector<int> qubits;
  int duration = 1;
  // Longest path to a sink, in cycles, including this node's own duration.
  std::int64_t priority = 0;
  NodeOrigin origin = NodeOrigin::static_gate;
};

/*
 * Gate dependency DAG.
 *
 * Node ids are dense indices assigned in insertion order. append() adds
 * last-writer edges on every touched qubit, so nodes sharing a qubit are
 * totally ordered. splice_after() is the only way to insert a node in the
 * middle of the graph; it takes over all outgoing edges of its anchor.
 */
class CircuitDag {
 public:
  CircuitDag() = default;
  explicit CircuitDag(int qubit_count);

  int qubit_count() const { return qubit_count_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeId next_id() const { return static_cast<NodeId>(nodes_.size()); }

  const GateNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  GateNode& node(NodeId id) { return nodes_.at(static_cast<std::size_t>(id)); }
  std::span<const GateNode> nodes() const { return nodes_; }
  std::span<GateNode> nodes() { return nodes_; }

  std::span<const NodeId> successors(NodeId id) const { return succ_[static_cast<std::size_t>(id)]; }
  std::span<const NodeId> predecessors(NodeId id) const {
    return pred_[static_cast<std::size_t>(id)];
  }

  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::size_t edge_count() const;

  // Adds a gate after everything currently on its qubits. Throws InputError on
  // out-of-range or duplicate qubits.
  NodeId append(GateKind kind, std::vector<int> qubits, int duration,
                NodeOrigin origin = NodeOrigin::static_gate);

  // Inserts a node on the qubits of `after`, directly behind it: every former
  // successor of `after` now depends on the new node instead.
  NodeId splice_after(NodeId after, GateKind kind, int duration, NodeOrigin origin);

  // Kahn ordering, smallest ready id first; throws InvariantViolation when a
  // cycle exists.
  std::vector<NodeId> topological_order() const;
  bool is_acyclic() const;

  // Nodes touching `qubit`, in a topological order.
  std::vector<NodeId> nodes_on_qubit(int qubit) const;

  bool reachable(NodeId from, NodeId to) const;

 private:
  void add_edge(NodeId from, NodeId to);

  int qubit_count_ = 0;
  std::vector<GateNode> nodes_;
  std::vector<std::vector<NodeId>> succ_;
  std::vector<std::vector<NodeId>> pred_;
  std::vector<NodeId> last_on_qubit_;
};

}  // namespace magicsim
