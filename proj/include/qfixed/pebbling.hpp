#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfixed/circuit.hpp"

namespace qfixed {

struct PebbleMove {
  bool pebble = true;  // false: unpebble
  int node = 0;        // 1..r; node 0 is the chain input
};

struct PebbleSchedule {
  int m = 0;
  int r = 0;
  bool feasible = false;
  long long total = 0;
  std::vector<PebbleMove> steps;
};

/// Minimal step count for the length-r line with m pebbles, or nullopt when
/// infeasible. The final configuration has only node r pebbled.
std::optional<long long> pebble_cost(int m, int r);

PebbleSchedule pebble_optimal(int m, int r);

/// Move list as text: one "pebble i" / "unpebble i" per line.
std::string schedule_to_text(const PebbleSchedule& s);

/// Emits chain step `node` reading `src` (node - 1's register, or the chain
/// input for node 1) into clean register `dst`.
using ChainStep = std::function<void(Circuit& c, int node, const Register& src, const Register& dst)>;

/// Plays the schedule on `slots` (at least m registers): a pebble emits the
/// step, an unpebble emits its inverse. Returns the register holding node r.
Register apply_schedule(Circuit& c, const PebbleSchedule& s, const Register& input, std::span<const Register> slots,
                        const ChainStep& step);

}  // namespace qfixed
