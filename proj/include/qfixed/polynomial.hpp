#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfixed/circuit.hpp"
#include "qfixed/fixed_point.hpp"
#include "qfixed/pebbling.hpp"

namespace qfixed {

enum class Parity { None, Even, Odd };

std::string_view parity_name(Parity p);
Parity parse_parity(std::string_view s);

/// Piecewise polynomial over the evaluation variable t, where t = x for
/// Parity::None and t = x^2 otherwise (odd functions multiply by x at the end).
/// Piece l covers [breakpoints[l], breakpoints[l+1]).
struct PiecewisePoly {
  FxFormat format{};
  int degree = 0;
  Parity parity = Parity::None;
  long double domain_lo = 0;  // input range in x
  long double domain_hi = 1;
  std::vector<long double> breakpoints;          // M + 1 entries, ascending, in t
  std::vector<std::vector<long double>> coeffs;  // M rows, ascending powers of t

  int pieces() const { return static_cast<int>(coeffs.size()); }
  int label_bits() const;
  bool signed_input() const { return domain_lo < 0; }
  /// Throws std::invalid_argument when the fields are inconsistent.
  void validate() const;

  long double t_of(long double x) const { return parity == Parity::None ? x : x * x; }
  /// Piece whose interval holds t (clamped to the first/last piece).
  int piece_of(long double t) const;
  /// Exact real evaluation of the represented function at x.
  long double eval(long double x) const;

  /// Unsigned comparison word for breakpoint i (offset binary for signed t).
  std::uint64_t breakpoint_word(int i) const;
  std::uint64_t coeff_word(int piece, int power) const;
  /// Largest |t| reached on the input domain.
  long double t_bound() const;
  /// Bound on the fixed-point evaluation error over all pieces.
  long double allowance() const;
};

/// Fixed-point evaluation error bound for one piece: coefficient rounding,
/// multiplier truncation propagated through Horner, squaring of the input
/// for parity-reduced pieces and the final multiplication for odd ones.
long double piece_allowance(std::span<const long double> coeffs, long double t_abs_max, long double x_abs_max,
                            FxFormat f, Parity parity, bool signed_input);

std::string to_json(const PiecewisePoly& pp);
PiecewisePoly piecewise_from_json(std::string_view text);

// Emitters.

/// Label rounds for i = 1..M-1: anc = [t >= bound_i], label ^= (i-1)^i,
/// coef ^= coef_words[i-1]^coef_words[i], then anc is uncomputed. `bounds`
/// holds the M-1 unsigned comparison words. coef starts at 0 and is first
/// NOT-loaded with coef_words[0]. `dirty` needs |t| - 1 wires.
void emit_label(Circuit& c, std::span<const std::uint64_t> bounds, WireSpan t, WireSpan label, Wire anc,
                WireSpan dirty, std::span<const std::uint64_t> coef_words = {}, WireSpan coef = {});

/// coef ^= from[v] ^ to[v] for the label value v: per value one MCX into
/// `flag`, a CNOT fan-out and the MCX again. `dirty` supplies k - 2 wires.
void emit_next_coeffs(Circuit& c, std::span<const std::uint64_t> from, std::span<const std::uint64_t> to,
                      WireSpan label, WireSpan coef, Wire flag, WireSpan dirty);

/// One self-contained Horner step for a single polynomial (ascending
/// coefficients): dst <- src * t + a_{d-i}; step 1 multiplies the constant
/// a_d instead of src. coef is clean before and after.
void emit_horner_step(Circuit& c, std::span<const long double> coeffs, FxFormat f, int i, WireSpan t, WireSpan src,
                      WireSpan dst, WireSpan coef, Wire overflow);

/// Full parallel evaluation: out <- P_label(x)(x). x is restored; scratch is
/// allocated from c and left holding intermediates (compute-only circuit).
void emit_parallel_poly(Circuit& c, const PiecewisePoly& pp, const Register& x, const Register& out);

// Standalone circuits with declared registers "x" and "out" (plus "label").

Circuit build_label(const PiecewisePoly& pp);                // x, label, anc, dirty
Circuit build_next_coeffs(const PiecewisePoly& pp, int step);  // label, coef, flag, dirty
Circuit build_parallel_poly(const PiecewisePoly& pp);
/// Single polynomial (M = 1, no parity, x >= 0). With a schedule the iterates
/// are pebbled through its registers; without one d registers are used.
Circuit build_horner(const PiecewisePoly& pp, const std::optional<PebbleSchedule>& schedule = std::nullopt);

// Closed-form estimates.

int ceil_log2(long long v);
long long t_fma(int n, int p);
long long t_poly(int n, int d, int p);
long long t_extra(int M);
long long t_label(int M, int n);
long long t_pp(int n, int d, int p, int M);
long long pp_qubits(int n, int d, int M);
/// Toffoli count of this library's parallel evaluation for unsigned input
/// without parity: the closed form adjusted for the label rounds, the
/// multi-controlled NOT pricing at small M and width-1 windows.
long long t_pp_constructed(int n, int d, int p, int M);

}  // namespace qfixed
