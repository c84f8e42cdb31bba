#include "qfixed/fixed_point.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qfixed {

FxFormat::FxFormat(int bits, int point) : n(bits), p(point) {
  if (bits < 1 || bits > 64) {
    throw std::invalid_argument("fixed-point width must be in [1, 64], got " + std::to_string(bits));
  }
  if (point < 0 || point > bits) {
    throw std::invalid_argument("point position must be in [0, n], got " + std::to_string(point));
  }
}

long double FxFormat::ulp() const { return std::ldexp(1.0L, -frac_bits()); }

std::uint64_t FxFormat::mask() const { return n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1); }

long double FxFormat::min_value() const { return -std::ldexp(1.0L, p - 1); }

long double FxFormat::max_value() const { return std::ldexp(1.0L, p - 1) - ulp(); }

FxWord::FxWord(FxFormat format, std::uint64_t bits) : format_(format), bits_(bits & format.mask()) {}

FxWord FxWord::from_signed(FxFormat format, std::int64_t raw) {
  return FxWord(format, static_cast<std::uint64_t>(raw));
}

std::int64_t FxWord::raw() const {
  if (format_.n == 64 || !negative()) return static_cast<std::int64_t>(bits_);
  return static_cast<std::int64_t>(bits_ | ~format_.mask());
}

long double FxWord::value() const { return std::ldexp(static_cast<long double>(raw()), -format_.frac_bits()); }

FxWord encode(long double v, FxFormat format) {
  if (!std::isfinite(v)) throw std::invalid_argument("cannot encode a non-finite value");
  long double scaled = std::floor(std::ldexp(v, format.frac_bits()) + 0.5L);
  const long double modulus = std::ldexp(1.0L, format.n);
  scaled = std::fmod(scaled, modulus);
  if (scaled < 0) scaled += modulus;
  if (scaled >= modulus) scaled -= modulus;
  return FxWord(format, static_cast<std::uint64_t>(scaled));
}

long double decode(const FxWord& w) { return w.value(); }

namespace {

void require_same(const FxWord& a, const FxWord& b) {
  if (!(a.format() == b.format())) throw std::invalid_argument("fixed-point format mismatch");
}

// y shifted by s bits within an n-bit window; right shifts floor.
std::uint64_t shifted(std::uint64_t y, int s, const FxFormat& f) {
  if (s >= 64 || s <= -64) return 0;
  if (s >= 0) return (y << s) & f.mask();
  return y >> (-s);
}

}  // namespace

FxWord ref_add(const FxWord& a, const FxWord& b) {
  require_same(a, b);
  return FxWord(a.format(), a.bits() + b.bits());
}

FxWord ref_sub(const FxWord& a, const FxWord& b) {
  require_same(a, b);
  return FxWord(a.format(), a.bits() - b.bits());
}

FxWord ref_negate(const FxWord& a) { return FxWord(a.format(), ~a.bits() + 1); }

FxWord ref_mul_shifted(const FxWord& x, const FxWord& y, int frac_shift, FxFormat out) {
  const int n = x.format().n;
  if (y.format().n != n || out.n != n) throw std::invalid_argument("multiplier operands must share n");
  if (y.negative()) throw std::invalid_argument("multiplicand must be non-negative");
  std::uint64_t r = 0;
  for (int i = 0; i < n; ++i) {
    if (!x.bit(i)) continue;
    const std::uint64_t addend = shifted(y.bits(), i - frac_shift, out);
    r = (i == n - 1) ? r - addend : r + addend;
  }
  return FxWord(out, r);
}

FxWord ref_mul_trunc(const FxWord& x, const FxWord& y) {
  require_same(x, y);
  return ref_mul_shifted(x, y, x.format().frac_bits(), x.format());
}

const std::vector<std::string>& ref_float_names() {
  static const std::vector<std::string> names{"invsqrt", "sqrt", "arcsin", "tanh", "gauss", "sin", "exp_neg"};
  return names;
}

double ref_float(std::string_view name, double x) {
  if (name == "invsqrt") {
    if (!(x > 0)) throw std::domain_error("invsqrt requires x > 0");
    return 1.0 / std::sqrt(x);
  }
  if (name == "sqrt") {
    if (x < 0) throw std::domain_error("sqrt requires x >= 0");
    return std::sqrt(x);
  }
  if (name == "arcsin") {
    if (x < -1 || x > 1) throw std::domain_error("arcsin requires |x| <= 1");
    return std::asin(x);
  }
  if (name == "tanh") return std::tanh(x);
  if (name == "gauss") return std::exp(-x * x);
  if (name == "sin") return std::sin(x);
  if (name == "exp_neg") return std::exp(-x);
  throw std::invalid_argument("unknown function '" + std::string(name) + "'");
}

__extension__ typedef unsigned __int128 u128;

std::string exact_decimal(std::int64_t raw, int frac_bits) {
  if (frac_bits < 0 || frac_bits > 64) throw std::invalid_argument("frac_bits out of range");
  const bool neg = raw < 0;
  u128 mag = neg ? static_cast<u128>(-(raw + 1)) + 1 : static_cast<u128>(raw);
  const u128 one = 1;
  const u128 mask = (one << frac_bits) - 1;
  std::string out = neg ? "-" : "";
  const auto whole = static_cast<std::uint64_t>(mag >> frac_bits);
  out += std::to_string(whole);
  u128 frac = mag & mask;
  if (frac != 0) {
    out += '.';
    while (frac != 0) {
      frac *= 10;
      out += static_cast<char>('0' + static_cast<int>(frac >> frac_bits));
      frac &= mask;
    }
  }
  return out;
}

}  // namespace qfixed
