#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "poly_reference.hpp"
#include "qfixed/arithmetic.hpp"
#include "qfixed/polynomial.hpp"
#include "support.hpp"

using namespace qfixed;
using qfixed::testing::describe;
using qfixed::testing::for_each_case;
using qfixed::testing::reference_pp;

namespace {

long long toffolis(const Circuit& c) { return count_resources(c).toffoli; }

PiecewisePoly uniform_pieces(FxFormat f, int degree, Parity parity, long double lo, long double hi, long double tlo,
                             long double thi, int M, long double scale, std::uint64_t seed) {
  PiecewisePoly pp;
  pp.format = f;
  pp.degree = degree;
  pp.parity = parity;
  pp.domain_lo = lo;
  pp.domain_hi = hi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int i = 0; i <= M; ++i) {
    const long double b = tlo + (thi - tlo) * i / M;
    pp.breakpoints.push_back(i == 0 || i == M ? b : decode(encode(b, f)));
  }
  for (int l = 0; l < M; ++l) {
    std::vector<long double> row;
    for (int j = 0; j <= degree; ++j) row.push_back(scale * coef(rng));
    pp.coeffs.push_back(row);
  }
  return pp;
}

PiecewisePoly single(FxFormat f, std::vector<long double> coeffs, long double lo = 0, long double hi = 1) {
  PiecewisePoly pp;
  pp.format = f;
  pp.degree = static_cast<int>(coeffs.size()) - 1;
  pp.domain_lo = lo;
  pp.domain_hi = hi;
  pp.breakpoints = {lo, hi};
  pp.coeffs = {std::move(coeffs)};
  return pp;
}

// every word of the format whose value lies in [lo, hi)
std::vector<std::uint64_t> domain_words(FxFormat f, long double lo, long double hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t w = 0; w <= f.mask(); ++w) {
    const long double v = decode(FxWord(f, w));
    if (v >= lo && v < hi) out.push_back(w);
  }
  return out;
}

// real value of the polynomial the circuit selects: squaring truncates t, so
// near a breakpoint the label may name the piece below the exact t
long double exact_on_chosen_piece(const PiecewisePoly& pp, const FxWord& xw) {
  const long double x = decode(xw);
  long double key = x;
  if (pp.parity != Parity::None) {
    const FxWord ax = x < 0 ? ref_negate(xw) : xw;
    key = decode(ref_mul_trunc(ax, ax));
  }
  const auto& row = pp.coeffs[static_cast<std::size_t>(pp.piece_of(key))];
  const long double t = pp.t_of(x);
  long double acc = 0;
  for (auto it = row.rbegin(); it != row.rend(); ++it) acc = acc * t + *it;
  return pp.parity == Parity::Odd ? acc * x : acc;
}

std::string compare_with_reference(const PiecewisePoly& pp, bool check_allowance) {
  const Circuit c = build_parallel_poly(pp);
  const auto x = c.reg("x"), out = c.reg("out");
  const auto words = domain_words(pp.format, pp.domain_lo, pp.domain_hi);
  const long double allow = pp.allowance();
  return for_each_case(
      c, words.size(), [&](BatchState& s, int l, std::size_t i) { s.write(x, l, words[i]); },
      [&](const BatchState& s, int l, std::size_t i) -> std::string {
        const FxWord xw(pp.format, words[i]);
        const FxWord want = reference_pp(pp, xw);
        const FxWord got(pp.format, s.read(out, l));
        if (got != want) return describe("x", decode(xw), "got", decode(got), "want", decode(want));
        if (s.read(x, l) != words[i]) return "input not restored";
        if (check_allowance && std::fabs(decode(got) - exact_on_chosen_piece(pp, xw)) > allow)
          return describe("allowance exceeded at", decode(xw), decode(got), exact_on_chosen_piece(pp, xw));
        return {};
      });
}

}  // namespace

TEST_CASE("closed forms") {
  CHECK(t_fma(8, 4) == 183);
  CHECK(t_poly(8, 3, 4) == 549);
  CHECK(t_extra(8) == 64);
  CHECK(t_label(8, 16) == 512);
  CHECK(t_pp(16, 3, 4, 8) == 2489);
  CHECK(pp_qubits(16, 3, 8) == 68);
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(8) == 3);
  CHECK(ceil_log2(9) == 4);
}

TEST_CASE("label register, exhaustive n=6") {
  PiecewisePoly pp = uniform_pieces(FxFormat(6, 1), 0, Parity::None, 0, 1, 0, 1, 4, 0.1L, 1);
  const Circuit c = build_label(pp);
  CHECK(toffolis(c) == 3 * (4 * 6 - 4));
  const auto x = c.reg("x"), label = c.reg("label"), dirty = c.reg("dirty");
  for (std::uint64_t w : domain_words(pp.format, 0, 1)) {
    for (std::uint64_t junk : {0ULL, 0x15ULL, 0x1fULL}) {
      BasisState s(c.width());
      write_bits(s, x, w);
      write_bits(s, dirty, junk);
      run_inplace(c, s);
      const long double v = decode(FxWord(pp.format, w));
      REQUIRE(read_bits(s, label) == static_cast<std::uint64_t>(std::floor(4 * v)));
      REQUIRE(read_bits(s, dirty) == junk);
      REQUIRE(read_bits(s, c.reg("anc")) == 0);
      REQUIRE(read_bits(s, x) == w);
    }
  }
}

TEST_CASE("label register on a signed domain") {
  PiecewisePoly pp = uniform_pieces(FxFormat(7, 3), 0, Parity::None, -3, 3, -3, 3, 6, 0.1L, 2);
  const Circuit c = build_label(pp);
  for (std::uint64_t w : domain_words(pp.format, -3, 3)) {
    BasisState s(c.width());
    write_bits(s, c.reg("x"), w);
    run_inplace(c, s);
    const long double v = decode(FxWord(pp.format, w));
    REQUIRE(static_cast<int>(read_bits(s, c.reg("label"))) == pp.piece_of(v));
    REQUIRE(static_cast<int>(read_bits(s, c.reg("label"))) == static_cast<int>(std::floor(v + 3)));
  }
}

TEST_CASE("single piece needs no label") {
  const PiecewisePoly pp = single(FxFormat(8, 2), {0.5L, 0.25L});
  const Circuit c = build_label(pp);
  CHECK(c.empty());
  CHECK(c.reg("label").len == 0);
}

TEST_CASE("coefficient loading telescopes to zero") {
  PiecewisePoly pp = uniform_pieces(FxFormat(8, 2), 3, Parity::None, 0, 1, 0, 1, 8, 1.0L, 3);
  CHECK(toffolis(build_next_coeffs(pp, 1)) == t_extra(8));
  pp.coeffs.resize(5);
  pp.breakpoints.resize(6);
  Circuit c;
  const auto label = c.declare(c.allocate("label", 3));
  const auto coef = c.declare(c.allocate("coef", 8));
  const auto flag = c.declare(c.allocate("flag", 1));
  const auto dirty = c.declare(c.allocate("dirty", 1));
  auto column = [&](int power) {
    std::vector<std::uint64_t> w;
    for (int l = 0; l < 5; ++l) w.push_back(power < 0 ? 0 : pp.coeff_word(l, power));
    return w;
  };
  // load a_3, step down to a_0, unload
  for (int power = 3; power >= -1; --power) {
    const auto from = column(power == 3 ? -1 : power + 1);
    emit_next_coeffs(c, from, column(power), label.wires(), coef.wires(), flag[0], dirty.wires());
  }
  for (std::uint64_t v = 0; v < 5; ++v) {
    for (std::uint64_t junk : {0ULL, 1ULL}) {
      BasisState s(c.width());
      write_bits(s, label, v);
      write_bits(s, dirty, junk);
      run_inplace(c, s);
      CHECK(read_bits(s, coef) == 0);
      CHECK(read_bits(s, flag) == 0);
      CHECK(read_bits(s, dirty) == junk);
    }
  }
}

TEST_CASE("coefficient step loads the next column") {
  PiecewisePoly pp = uniform_pieces(FxFormat(8, 2), 2, Parity::None, 0, 1, 0, 1, 3, 1.0L, 4);
  const Circuit c = build_next_coeffs(pp, 1);
  for (int v = 0; v < 3; ++v) {
    BasisState s(c.width());
    write_bits(s, c.reg("label"), static_cast<std::uint64_t>(v));
    write_bits(s, c.reg("coef"), pp.coeff_word(v, 2));
    run_inplace(c, s);
    CHECK(read_bits(s, c.reg("coef")) == pp.coeff_word(v, 1));
  }
}

TEST_CASE("Horner chain counts and values") {
  const PiecewisePoly cubic = single(FxFormat(8, 4), {0.5L, -0.25L, 0.125L, 0.5L});
  CHECK(toffolis(build_horner(cubic)) == t_poly(8, 3, 4));
  CHECK(toffolis(build_horner(cubic)) == 549);

  const FxFormat f(16, 4);
  const Circuit c = build_horner(single(f, {1.0L, 0.0L, 1.0L}, 0, 2));
  BasisState s(c.width());
  write_register(s, c.reg("x"), encode(1.5L, f));
  run_inplace(c, s);
  CHECK(std::fabs(decode(read_register(s, c.reg("out"))) - 3.25L) <= 2 * 16 * f.ulp());

  const Circuit k = build_horner(single(f, {1.25L}));
  BasisState ks(k.width());
  run_inplace(k, ks);
  CHECK(decode(read_register(ks, k.reg("out"))) == 1.25L);
}

TEST_CASE("pebbled Horner equals the plain chain") {
  const FxFormat f(12, 2);
  const PiecewisePoly pp = single(f, {0.3L, -0.7L, 0.45L, 0.2L, -0.1L}, 0, 1.5);
  const auto sched = pebble_optimal(3, 4);
  const Circuit plain = build_horner(pp);
  const Circuit pebbled = build_horner(pp, sched);
  CHECK(toffolis(pebbled) == sched.total * (toffolis(plain) / 4));
  CHECK(count_resources(pebbled).qubits < count_resources(plain).qubits);
  std::mt19937_64 rng(5);
  const auto words = domain_words(f, 0, 1.5);
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t w = words[rng() % words.size()];
    BasisState a(plain.width()), b(pebbled.width());
    write_bits(a, plain.reg("x"), w);
    write_bits(b, pebbled.reg("x"), w);
    run_inplace(plain, a);
    run_inplace(pebbled, b);
    REQUIRE(read_bits(b, pebbled.reg("out")) == read_bits(a, plain.reg("out")));
    REQUIRE(read_bits(b, pebbled.reg("out")) == reference_pp(pp, FxWord(f, w)).bits());
    // everything except x, the output and the overflow sink is clear
    std::size_t set = 0;
    const auto out = pebbled.reg("out");
    for (Wire v = 0; v < pebbled.width(); ++v) {
      const bool kept = (v >= out.start && v < out.start + static_cast<Wire>(out.len)) || v < static_cast<Wire>(f.n);
      if (!kept && b.get(v)) ++set;
    }
    REQUIRE(set <= 1);
  }
}

TEST_CASE("Horner chain rejects what it cannot evaluate") {
  PiecewisePoly two = uniform_pieces(FxFormat(8, 2), 1, Parity::None, 0, 1, 0, 1, 2, 0.5L, 1);
  CHECK_THROWS_AS(build_horner(two), std::invalid_argument);
  CHECK_THROWS_AS(build_horner(single(FxFormat(8, 2), {0.1L, 0.2L}), pebble_optimal(3, 4)), std::invalid_argument);
}

TEST_CASE("parallel evaluation counts") {
  for (int n : {8, 16, 32}) {
    for (int p : {2, 4}) {
      for (int d : {1, 2, 3}) {
        for (int M : {8, 16}) {
          PiecewisePoly pp = uniform_pieces(FxFormat(n, p), d, Parity::None, 0, 1, 0, 1, M, 0.5L, 7);
          const Circuit c = build_parallel_poly(pp);
          const long long built = toffolis(c);
          CAPTURE(n);
          CAPTURE(d);
          CAPTURE(M);
          CHECK(built == t_pp_constructed(n, d, p, M));
          // only the label rounds differ from the closed form
          CHECK(t_pp(n, d, p, M) - built == t_label(M, n) - (M - 1LL) * (4LL * n - 4));
          CHECK(count_resources(c).qubits == pp_qubits(n, d, M) + n + 1);
        }
      }
    }
  }
}

TEST_CASE("two-interval piecewise linear function") {
  const FxFormat f(16, 1);
  PiecewisePoly pp;
  pp.format = f;
  pp.degree = 1;
  pp.domain_lo = 0;
  pp.domain_hi = 1;
  pp.breakpoints = {0, 0.5L, 1};
  pp.coeffs = {{0, 0.5L}, {0, 0.75L}};
  const Circuit c = build_parallel_poly(pp);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t w = rng() & 0x7fff;
    BasisState s(c.width());
    write_bits(s, c.reg("x"), w);
    run_inplace(c, s);
    const long double x = decode(FxWord(f, w));
    const long double want = x < 0.5L ? 0.5L * x : 0.75L * x;
    REQUIRE(std::fabs(decode(read_register(s, c.reg("out"))) - want) <= 16 * f.ulp() * 2);
  }
}

TEST_CASE("parallel evaluation matches the word model exhaustively") {
  const FxFormat f(12, 4);
  SUBCASE("unsigned, no parity") {
    CHECK(compare_with_reference(uniform_pieces(f, 3, Parity::None, 0, 2, 0, 2, 5, 0.25L, 11), true) == "");
  }
  SUBCASE("signed, no parity") {
    CHECK(compare_with_reference(uniform_pieces(f, 3, Parity::None, -2, 2, -2, 2, 4, 0.25L, 12), true) == "");
  }
  SUBCASE("signed, even") {
    CHECK(compare_with_reference(uniform_pieces(f, 2, Parity::Even, -2, 2, 0, 4, 4, 0.25L, 13), true) == "");
  }
  SUBCASE("signed, odd") {
    CHECK(compare_with_reference(uniform_pieces(f, 2, Parity::Odd, -2, 2, 0, 4, 3, 0.125L, 14), true) == "");
  }
  SUBCASE("unsigned, odd, constant") {
    CHECK(compare_with_reference(uniform_pieces(f, 0, Parity::Odd, 0, 2, 0, 4, 2, 0.5L, 15), true) == "");
  }
  SUBCASE("single piece, degree 0") {
    CHECK(compare_with_reference(single(f, {0.75L}), true) == "");
  }
}

TEST_CASE("evaluation envelope leaves scratch clean") {
  const PiecewisePoly pp = uniform_pieces(FxFormat(10, 3), 2, Parity::Odd, -1.5, 1.5, 0, 2.25, 3, 0.2L, 21);
  const Circuit env = with_uncompute(build_parallel_poly(pp), "out");
  const auto words = domain_words(pp.format, -1.5, 1.5);
  const auto rep = evaluate_words_checked(env, env.reg("x"), env.reg("result"), words, {env.reg("x"), env.reg("result")});
  CHECK(rep.clean);
  for (std::size_t i = 0; i < words.size(); ++i)
    REQUIRE(rep.outputs[i] == reference_pp(pp, FxWord(pp.format, words[i])).bits());
}

TEST_CASE("json round trip") {
  const PiecewisePoly pp = uniform_pieces(FxFormat(20, 3), 2, Parity::Even, -1, 1, 0, 1, 3, 0.3L, 5);
  const PiecewisePoly back = piecewise_from_json(to_json(pp));
  CHECK(back.format == pp.format);
  CHECK(back.parity == Parity::Even);
  CHECK(back.breakpoints == pp.breakpoints);
  CHECK(back.coeffs == pp.coeffs);
  CHECK(to_json(back) == to_json(pp));
  CHECK_THROWS_AS(piecewise_from_json("{}"), std::invalid_argument);
  CHECK_THROWS_AS(piecewise_from_json("not json"), std::invalid_argument);
}

TEST_CASE("validation") {
  PiecewisePoly pp = single(FxFormat(8, 2), {0.5L, 0.25L});
  CHECK_NOTHROW(pp.validate());
  pp.coeffs[0].push_back(1);
  CHECK_THROWS_AS(pp.validate(), std::invalid_argument);
  pp = single(FxFormat(8, 2), {5.0L});
  CHECK_THROWS_AS(pp.validate(), std::invalid_argument);
  pp = single(FxFormat(8, 2), {0.5L});
  pp.breakpoints = {1, 0};
  CHECK_THROWS_AS(pp.validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_parity("sideways"), std::invalid_argument);
}
