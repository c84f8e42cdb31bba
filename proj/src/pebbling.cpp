#include "qfixed/pebbling.hpp"

#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace qfixed {

namespace {

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

struct Table {
  std::mutex mu;
  std::map<std::pair<int, int>, std::pair<long long, int>> memo;  // cost, best split
};

Table& table() {
  static Table t;
  return t;
}

std::pair<long long, int> solve(int m, int r) {
  if (r == 1) return {1, 0};
  if (m <= 1) return {kInf, 0};
  auto& t = table();
  {
    std::lock_guard lock(t.mu);
    if (auto it = t.memo.find({m, r}); it != t.memo.end()) return it->second;
  }
  std::pair<long long, int> best{kInf, 0};
  for (int k = 1; k < r; ++k) {
    const long long a = solve(m, k).first, b = solve(m - 1, r - k).first, c = solve(m - 1, k).first;
    if (a >= kInf || b >= kInf || c >= kInf) continue;
    if (a + b + c < best.first) best = {a + b + c, k};
  }
  std::lock_guard lock(t.mu);
  t.memo[{m, r}] = best;
  return best;
}

void build(int m, int r, int offset, std::vector<PebbleMove>& out) {
  if (r == 1) {
    out.push_back({true, offset + 1});
    return;
  }
  const int k = solve(m, r).second;
  build(m, k, offset, out);
  build(m - 1, r - k, offset + k, out);
  std::vector<PebbleMove> clear;
  build(m - 1, k, offset, clear);
  for (auto it = clear.rbegin(); it != clear.rend(); ++it) out.push_back({!it->pebble, it->node});
}

}  // namespace

std::optional<long long> pebble_cost(int m, int r) {
  if (m < 1 || r < 1) throw std::invalid_argument("pebbling needs m >= 1 and r >= 1");
  const long long cost = solve(m, r).first;
  if (cost >= kInf) return std::nullopt;
  return cost;
}

PebbleSchedule pebble_optimal(int m, int r) {
  PebbleSchedule s;
  s.m = m;
  s.r = r;
  const auto cost = pebble_cost(m, r);
  if (!cost) return s;
  s.feasible = true;
  s.total = *cost;
  build(m, r, 0, s.steps);
  return s;
}

std::string schedule_to_text(const PebbleSchedule& s) {
  std::ostringstream os;
  if (!s.feasible) {
    os << "infeasible\n";
    return os.str();
  }
  for (const auto& mv : s.steps) os << (mv.pebble ? "pebble " : "unpebble ") << mv.node << '\n';
  return os.str();
}

Register apply_schedule(Circuit& c, const PebbleSchedule& s, const Register& input, std::span<const Register> slots,
                        const ChainStep& step) {
  if (!s.feasible) throw std::invalid_argument("schedule is infeasible");
  if (static_cast<int>(slots.size()) < s.m) throw std::invalid_argument("fewer registers than the schedule's budget");
  std::vector<int> slot_of(static_cast<std::size_t>(s.r) + 1, -1);
  std::vector<bool> busy(slots.size(), false);
  for (const auto& mv : s.steps) {
    if (mv.node < 1 || mv.node > s.r) throw std::invalid_argument("schedule node outside chain");
    if (mv.node > 1 && slot_of[mv.node - 1] < 0) throw std::logic_error("predecessor not pebbled");
    const Register& src = mv.node == 1 ? input : slots[static_cast<std::size_t>(slot_of[mv.node - 1])];
    if (mv.pebble) {
      if (slot_of[mv.node] >= 0) throw std::logic_error("node pebbled twice");
      std::size_t free = 0;
      while (free < busy.size() && busy[free]) ++free;
      if (free == busy.size()) throw std::logic_error("out of registers");
      busy[free] = true;
      slot_of[mv.node] = static_cast<int>(free);
      step(c, mv.node, src, slots[free]);
    } else {
      const int slot = slot_of[mv.node];
      if (slot < 0) throw std::logic_error("unpebbling a clear node");
      const std::size_t mark = c.size();
      step(c, mv.node, src, slots[static_cast<std::size_t>(slot)]);
      c.reverse_tail(mark);
      busy[static_cast<std::size_t>(slot)] = false;
      slot_of[mv.node] = -1;
    }
  }
  if (slot_of[s.r] < 0) throw std::logic_error("schedule does not end with the last node pebbled");
  return slots[static_cast<std::size_t>(slot_of[s.r])];
}

}  // namespace qfixed
