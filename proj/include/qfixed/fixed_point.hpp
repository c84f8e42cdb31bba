#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qfixed {

/// Two's-complement fixed-point format: n total bits, p of them left of the
/// binary point. Words wider than 64 bits are not supported.
struct FxFormat {
  int n = 1;
  int p = 0;

  FxFormat() = default;
  FxFormat(int bits, int point);

  int frac_bits() const { return n - p; }
  long double ulp() const;
  std::uint64_t mask() const;
  long double min_value() const;
  long double max_value() const;

  friend bool operator==(const FxFormat&, const FxFormat&) = default;
};

class FxWord {
 public:
  FxWord() = default;
  FxWord(FxFormat format, std::uint64_t bits);

  static FxWord from_signed(FxFormat format, std::int64_t raw);

  std::uint64_t bits() const { return bits_; }
  /// Sign-extended integer value of the word.
  std::int64_t raw() const;
  const FxFormat& format() const { return format_; }
  bool bit(int i) const { return (bits_ >> i) & 1U; }
  bool negative() const { return bit(format_.n - 1); }
  long double value() const;

  friend bool operator==(const FxWord&, const FxWord&) = default;

 private:
  FxFormat format_{};
  std::uint64_t bits_ = 0;
};

/// round-half-up on v * 2^(n-p), then wrap modulo 2^n.
FxWord encode(long double v, FxFormat format);
long double decode(const FxWord& w);

FxWord ref_add(const FxWord& a, const FxWord& b);
FxWord ref_sub(const FxWord& a, const FxWord& b);
FxWord ref_negate(const FxWord& a);

/// Bit-exact model of the pre-truncating shift-and-add multiplier.
/// Addend i is y shifted by i - (n - p); bits below the LSB are dropped.
/// The most significant bit of x is applied with subtraction.
FxWord ref_mul_trunc(const FxWord& x, const FxWord& y);

/// Same model with an explicit fractional shift: addend i is y shifted by
/// i - frac_shift, accumulated in `out` (all three share n).
FxWord ref_mul_shifted(const FxWord& x, const FxWord& y, int frac_shift, FxFormat out);

/// Double-precision ground truth for the supported functions:
/// invsqrt, sqrt, arcsin, tanh, gauss (exp(-x^2)), sin, exp_neg (exp(-x)).
double ref_float(std::string_view name, double x);
const std::vector<std::string>& ref_float_names();

/// Exact decimal rendering of raw / 2^frac_bits.
std::string exact_decimal(std::int64_t raw, int frac_bits);

}  // namespace qfixed
