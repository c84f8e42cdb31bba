#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

#include "qfixed/fixed_point.hpp"

using namespace qfixed;

TEST_CASE("format validation") {
  CHECK_THROWS_AS(FxFormat(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(FxFormat(8, 9), std::invalid_argument);
  CHECK_THROWS_AS(FxFormat(8, -1), std::invalid_argument);
  CHECK_THROWS_AS(FxFormat(65, 4), std::invalid_argument);
  const FxFormat f(8, 4);
  CHECK(f.ulp() == 0.0625L);
  CHECK(f.min_value() == -8.0L);
  CHECK(f.max_value() == 8.0L - 0.0625L);
}

TEST_CASE("encode examples") {
  const FxFormat f(8, 4);
  CHECK(encode(0, f).bits() == 0b00000000);
  CHECK(encode(1.5, f).bits() == 0b00011000);
  CHECK(encode(-0.0625, f).bits() == 0b11111111);
  // round half up on the scaled integer
  CHECK(encode(0.03125, f).bits() == 1);
  CHECK(encode(-0.03125, f).bits() == 0);
  // out of range wraps modulo 2^n
  CHECK(encode(8.0, f).bits() == 0b10000000);
  CHECK(encode(16.5, f).bits() == encode(0.5, f).bits());
}

TEST_CASE("encode/decode round trip on every representable value") {
  for (int n : {1, 5, 8}) {
    for (int p = 0; p <= n; ++p) {
      const FxFormat f(n, p);
      for (std::uint64_t b = 0; b <= f.mask(); ++b) {
        const FxWord w(f, b);
        REQUIRE(encode(decode(w), f) == w);
      }
    }
  }
  const FxFormat wide(64, 3);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const FxWord w(wide, rng());
    REQUIRE(encode(decode(w), wide) == w);
  }
}

TEST_CASE("decode of encode rounds to nearest in range") {
  const FxFormat f(16, 4);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-8.0, 7.99);
  for (int i = 0; i < 2000; ++i) {
    const double v = dist(rng);
    CHECK(std::fabs(static_cast<double>(decode(encode(v, f))) - v) <= 0.5 * static_cast<double>(f.ulp()));
  }
}

TEST_CASE("ref_add wraps") {
  const FxFormat f4(4, 4);
  CHECK(ref_add(FxWord(f4, 0b0001), FxWord(f4, 0b0001)).bits() == 0b0010);
  CHECK(ref_add(FxWord(f4, 0b1000), FxWord(f4, 0b1000)).bits() == 0b0000);
  const FxFormat f(8, 4);
  CHECK(ref_add(encode(1.5, f), encode(2.25, f)) == encode(3.75, f));
  CHECK_THROWS_AS(ref_add(encode(1, f), encode(1, FxFormat(8, 3))), std::invalid_argument);
}

TEST_CASE("wrapping addition is associative and commutative") {
  const FxFormat f(6, 2);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const FxWord a(f, rng()), b(f, rng()), c(f, rng());
    CHECK(ref_add(a, b) == ref_add(b, a));
    CHECK(ref_add(ref_add(a, b), c) == ref_add(a, ref_add(b, c)));
  }
}

TEST_CASE("ref_mul_trunc examples") {
  const FxFormat f(8, 4);
  const FxWord one = encode(1.0, f);
  for (std::uint64_t y = 0; y < 128; ++y) {
    REQUIRE(ref_mul_trunc(one, FxWord(f, y)) == FxWord(f, y));
  }
  CHECK(ref_mul_trunc(encode(-1.0, f), encode(2.0, f)) == encode(-2.0, f));
  CHECK_THROWS_AS(ref_mul_trunc(one, encode(-1.0, f)), std::invalid_argument);
}

TEST_CASE("ref_mul_trunc error bound, exhaustive n=8 p=4") {
  const FxFormat f(8, 4);
  const long double bound = 8 * f.ulp();
  long double worst = 0;
  for (std::uint64_t x = 0; x < 256; ++x) {
    for (std::uint64_t y = 0; y < 128; ++y) {
      const FxWord wx(f, x), wy(f, y);
      const long double exact = decode(wx) * decode(wy);
      const long double got = decode(ref_mul_trunc(wx, wy));
      // compare modulo the representable range
      long double diff = std::fmod(std::fabs(exact - got), 16.0L);
      diff = std::min(diff, 16.0L - diff);
      worst = std::max(worst, diff);
    }
  }
  CHECK(worst <= bound);
}

TEST_CASE("ref_mul_trunc error bound, random n=32") {
  const FxFormat f(32, 8);
  const long double bound = 32 * f.ulp();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100000; ++i) {
    // keep the product in range: |x| < 8, 0 <= y < 8
    const FxWord x = FxWord::from_signed(f, static_cast<std::int64_t>(rng() % (1ULL << 27)) - (1LL << 26));
    const FxWord y(f, rng() % (1ULL << 27));
    const long double err = std::fabs(decode(x) * decode(y) - decode(ref_mul_trunc(x, y)));
    REQUIRE(err <= bound);
  }
}

TEST_CASE("ref_mul_trunc is exact when no bit is dropped") {
  const FxFormat f(12, 6);
  for (int a = -32; a < 32; ++a) {
    for (int b = 0; b < 32; ++b) {
      if (std::abs(a * b) >= 32) continue;
      const FxWord x = encode(a, f), y = encode(b, f);
      REQUIRE(decode(ref_mul_trunc(x, y)) == static_cast<long double>(a * b));
    }
  }
}

TEST_CASE("ref_float") {
  CHECK(ref_float("invsqrt", 4.0) == 0.5);
  CHECK(ref_float("arcsin", 0.5) == doctest::Approx(std::numbers::pi / 6).epsilon(1e-15));
  CHECK(ref_float("tanh", 1.0) == doctest::Approx(0.7615941559557649).epsilon(1e-15));
  CHECK(ref_float("gauss", 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(ref_float("exp_neg", 2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK_THROWS_AS(ref_float("invsqrt", 0.0), std::domain_error);
  CHECK_THROWS_AS(ref_float("arcsin", 1.5), std::domain_error);
  CHECK_THROWS_AS(ref_float("cosh", 1.0), std::invalid_argument);
}

TEST_CASE("exact decimal rendering") {
  CHECK(exact_decimal(24, 4) == "1.5");
  CHECK(exact_decimal(-1, 4) == "-0.0625");
  CHECK(exact_decimal(0, 10) == "0");
  CHECK(exact_decimal(5, 0) == "5");
  CHECK(exact_decimal(1, 64) == "0.0000000000000000000542101086242752217003726400434970855712890625");
  CHECK(exact_decimal(INT64_MIN, 63) == "-1");
}
