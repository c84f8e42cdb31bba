#include <doctest.h>

#include <random>
#include <stdexcept>

#include "pebble_check.hpp"
#include "qfixed/arithmetic.hpp"
#include "qfixed/pebbling.hpp"
#include "qfixed/simulator.hpp"
#include "table1.hpp"

using namespace qfixed;
using qfixed::testing::check_pebble_game;

TEST_CASE("table of optimal step counts") {
  for (int m = 1; m <= 8; ++m) {
    for (std::size_t j = 0; j < testing::kTable1Cols.size(); ++j) {
      const int r = testing::kTable1Cols[j];
      const long long want = testing::kTable1[static_cast<std::size_t>(m - 1)][j];
      const auto got = pebble_cost(m, r);
      CAPTURE(m);
      CAPTURE(r);
      if (want == 0) {
        CHECK_FALSE(got.has_value());
      } else {
        REQUIRE(got.has_value());
        CHECK(*got == want);
      }
    }
  }
}

TEST_CASE("named cells") {
  CHECK(pebble_optimal(3, 4).total == 9);
  CHECK_FALSE(pebble_optimal(2, 3).feasible);
  CHECK(pebble_optimal(8, 64).total == 369);
  CHECK(pebble_optimal(1, 1).total == 1);
  CHECK_THROWS_AS(pebble_cost(0, 3), std::invalid_argument);
}

TEST_CASE("schedules obey the game rules") {
  for (int m = 1; m <= 8; ++m) {
    for (int r : {1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 16, 32, 64}) {
      const auto s = pebble_optimal(m, r);
      if (!s.feasible) continue;
      const std::string why = check_pebble_game(s);
      CAPTURE(m);
      CAPTURE(r);
      CHECK_MESSAGE(why.empty(), why);
    }
  }
}

TEST_CASE("cost is monotone") {
  for (int m = 2; m <= 8; ++m) {
    for (int r = 1; r <= 40; ++r) {
      const auto here = pebble_cost(m, r), fewer = pebble_cost(m - 1, r), longer = pebble_cost(m, r + 1);
      if (fewer && here) CHECK(*here <= *fewer);
      if (fewer) CHECK(here.has_value());
      if (longer && here) CHECK(*longer >= *here);
      if (longer) CHECK(here.has_value());
    }
  }
}

TEST_CASE("ample memory still pays for cleanup") {
  // with m >= r every node is computed once and every intermediate cleared once
  for (int r = 1; r <= 8; ++r) CHECK(*pebble_cost(8, r) == 2 * r - 1);
}

TEST_CASE("schedule text") {
  CHECK(schedule_to_text(pebble_optimal(2, 2)) == "pebble 1\npebble 2\nunpebble 1\n");
  CHECK(schedule_to_text(pebble_optimal(1, 2)) == "infeasible\n");
}

namespace {

// node i: dst = src + 2i + 1 via a constant load and an adder into dst
void chain_step(Circuit& c, int node, const Register& src, const Register& dst, const Register& k, Wire carry) {
  emit_xor_const(c, k.wires(), static_cast<std::uint64_t>(2 * node + 1));
  emit_add(c, src.wires(), dst.wires(), carry);
  emit_add(c, k.wires(), dst.wires(), carry);
  emit_xor_const(c, k.wires(), static_cast<std::uint64_t>(2 * node + 1));
}

}  // namespace

TEST_CASE("pebbled chain equals the unpebbled chain") {
  const int n = 10, r = 4, m = 3;
  const auto sched = pebble_optimal(m, r);
  REQUIRE(sched.feasible);

  Circuit c;
  const auto in = c.declare(c.allocate("in", n));
  std::vector<Register> slots;
  for (int i = 0; i < m; ++i) slots.push_back(c.declare(c.allocate("slot" + std::to_string(i), n)));
  const auto k = c.declare(c.allocate("k", n));
  const auto carry = c.declare(c.allocate("carry", 1));
  auto step = [&](Circuit& cc, int node, const Register& src, const Register& dst) {
    chain_step(cc, node, src, dst, k, carry.start);
  };
  const Register out = apply_schedule(c, sched, in, slots, step);

  Circuit plain;
  const auto pin = plain.declare(plain.allocate("in", n));
  std::vector<Register> iter;
  for (int i = 0; i < r; ++i) iter.push_back(plain.declare(plain.allocate("y" + std::to_string(i), n)));
  const auto pk = plain.declare(plain.allocate("k", n));
  const auto pcarry = plain.declare(plain.allocate("carry", 1));
  for (int i = 1; i <= r; ++i) chain_step(plain, i, i == 1 ? pin : iter[static_cast<std::size_t>(i - 2)],
                                          iter[static_cast<std::size_t>(i - 1)], pk, pcarry.start);

  const long long step_cost = count_resources(plain).toffoli / r;
  CHECK(count_resources(c).toffoli == sched.total * step_cost);

  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t v = rng() & ((1U << n) - 1);
    BasisState s(c.width()), ps(plain.width());
    write_bits(s, in, v);
    write_bits(ps, pin, v);
    run_inplace(c, s);
    run_inplace(plain, ps);
    // sums stay below 2^n, so the carry wire is untouched
    REQUIRE(read_bits(s, out) == read_bits(ps, iter.back()));
    REQUIRE(read_bits(s, out) == ((v + 24) & ((1U << n) - 1)));
    for (const auto& slot : slots)
      if (slot.start != out.start) REQUIRE(read_bits(s, slot) == 0);
    REQUIRE(read_bits(s, k) == 0);
  }
}

TEST_CASE("apply_schedule rejects short register lists") {
  Circuit c;
  const auto in = c.allocate("in", 2);
  const auto a = c.allocate("a", 2);
  std::vector<Register> slots{a};
  CHECK_THROWS_AS(apply_schedule(c, pebble_optimal(2, 2), in, slots, [](Circuit&, int, const Register&, const Register&) {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_schedule(c, pebble_optimal(1, 2), in, slots, [](Circuit&, int, const Register&, const Register&) {}),
                  std::invalid_argument);
}
