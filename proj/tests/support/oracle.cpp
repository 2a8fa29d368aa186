#include "oracle.h"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace magicsim::testing {

namespace {

bool share_qubit(const PlainGate& a, const PlainGate& b) {
  for (int q : a.qubits) {
    if (std::find(b.qubits.begin(), b.qubits.end(), q) != b.qubits.end()) {
      return true;
    }
  }
  return false;
}

// j depends on every earlier gate it shares a qubit with.
std::vector<std::vector<int>> earlier_conflicts(const std::vector<PlainGate>& gates) {
  std::vector<std::vector<int>> deps(gates.size());
  for (std::size_t j = 0; j < gates.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (share_qubit(gates[i], gates[j])) {
        deps[j].push_back(static_cast<int>(i));
      }
    }
  }
  return deps;
}

std::int64_t longest_from(const std::vector<PlainGate>& gates, std::size_t i) {
  std::int64_t best = 0;
  for (std::size_t j = i + 1; j < gates.size(); ++j) {
    if (share_qubit(gates[i], gates[j])) {
      best = std::max(best, longest_from(gates, j));
    }
  }
  return gates[i].duration + best;
}

}  // namespace

std::vector<std::int64_t> oracle_priorities(const std::vector<PlainGate>& gates) {
  std::vector<std::int64_t> p;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    p.push_back(longest_from(gates, i));
  }
  return p;
}

OracleResult oracle_simulate(const std::vector<PlainGate>& gates, const OracleConfig& cfg) {
  const std::size_t n = gates.size();
  const auto deps = earlier_conflicts(gates);
  const auto priority = oracle_priorities(gates);

  std::size_t injections = 0;
  for (const PlainGate& g : gates) {
    injections += g.injection ? 1 : 0;
  }

  // Every cycle at which a state becomes usable, enough of them for all
  // injections.
  std::multiset<std::int64_t> supply;
  if (injections > 0) {
    if (cfg.F <= 0) {
      throw std::runtime_error("oracle: no supply");
    }
    for (int u = 0; u < cfg.F; ++u) {
      const std::int64_t offset =
          cfg.stagger ? static_cast<std::int64_t>(u) * cfg.t_prod / cfg.F : 0;
      for (std::size_t k = 1; k <= injections; ++k) {
        supply.insert(offset + static_cast<std::int64_t>(k) * cfg.t_prod + cfg.handoff);
      }
    }
  }

  OracleResult r;
  r.start.assign(n, 0);
  std::vector<std::int64_t> finish(n, 0);
  std::vector<bool> started(n, false);
  std::size_t consumed = 0;
  std::size_t remaining = n;
  std::int64_t t = 1;

  while (remaining > 0) {
    std::vector<int> ready;
    for (std::size_t j = 0; j < n; ++j) {
      if (started[j]) {
        continue;
      }
      bool ok = true;
      for (int i : deps[j]) {
        ok = ok && started[static_cast<std::size_t>(i)] &&
             finish[static_cast<std::size_t>(i)] < t;
      }
      if (ok) {
        ready.push_back(static_cast<int>(j));
      }
    }
    std::sort(ready.begin(), ready.end(), [&](int a, int b) {
      return priority[static_cast<std::size_t>(a)] != priority[static_cast<std::size_t>(b)]
                 ? priority[static_cast<std::size_t>(a)] > priority[static_cast<std::size_t>(b)]
                 : a < b;
    });

    const auto usable = static_cast<std::size_t>(
        std::distance(supply.begin(), supply.upper_bound(t)));
    std::size_t available = usable - consumed;
    for (int j : ready) {
      const PlainGate& g = gates[static_cast<std::size_t>(j)];
      if (g.injection) {
        if (available == 0) {
          continue;
        }
        --available;
        ++consumed;
      }
      started[static_cast<std::size_t>(j)] = true;
      r.start[static_cast<std::size_t>(j)] = t;
      finish[static_cast<std::size_t>(j)] = t + g.duration - 1;
      r.cycles = std::max(r.cycles, finish[static_cast<std::size_t>(j)]);
      --remaining;
    }

    // Next time anything can change: a completion frees successors, or a
    // new state arrives.
    std::int64_t next = std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = 0; j < n; ++j) {
      if (started[j] && finish[j] + 1 > t) {
        next = std::min(next, finish[j] + 1);
      }
    }
    if (const auto it = supply.upper_bound(t); it != supply.end()) {
      next = std::min(next, *it);
    }
    if (remaining > 0 && next == std::numeric_limits<std::int64_t>::max()) {
      throw std::runtime_error("oracle: stuck");
    }
    t = next;
  }
  return r;
}

}  // namespace magicsim::testing
