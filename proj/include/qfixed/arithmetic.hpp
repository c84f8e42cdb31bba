#pragma once

#include <cstdint>
#include <optional>

#include "qfixed/circuit.hpp"
#include "qfixed/fixed_point.hpp"

namespace qfixed {

// Wire-level emitters. Operands are LSB-first wire lists.

/// b <- a + b mod 2^w, carry ^= carry-out. 2w - 1 Toffolis.
void emit_add(Circuit& c, WireSpan a, WireSpan b, Wire carry);
/// Inverse of emit_add: b <- b - a mod 2^w, carry ^= borrow.
void emit_sub(Circuit& c, WireSpan a, WireSpan b, Wire carry);

/// Controlled emit_add. 3w + 3 Toffolis for w >= 2, 5 for w = 1.
/// A width-1 add needs one extra wire (any state, restored) passed as `spare`.
void emit_cadd(Circuit& c, Wire ctrl, WireSpan a, WireSpan b, Wire carry, std::optional<Wire> spare = {});
void emit_csub(Circuit& c, Wire ctrl, WireSpan a, WireSpan b, Wire carry, std::optional<Wire> spare = {});

/// target ^= carry-out of (x + k) over |x| bits using |x| - 1 dirty wires.
/// With restore the dirty wires are returned to their input state
/// (4w - 6 Toffolis); without it they hold garbage (2w - 2 Toffolis) and the
/// emitted segment must later be undone.
void emit_carry_ladder(Circuit& c, WireSpan x, std::uint64_t k, Wire target, WireSpan dirty, bool restore);

/// out ^= [x < a] for unsigned x; dirty wires restored.
void emit_cmp_const(Circuit& c, WireSpan x, std::uint64_t a, Wire out, WireSpan dirty);

/// b <- b + k mod 2^w without clean ancillas; needs w - 1 dirty wires.
void emit_const_add_inplace(Circuit& c, std::uint64_t k, WireSpan b, WireSpan dirty);

/// ctrl ? r += (y shifted by `shift`) : nothing, on the window of r the shifted
/// operand reaches. Left shifts carry into `overflow`; right shifts carry into
/// the bit of r just above the window, so r must be below 2^window on entry.
void emit_shifted_cadd(Circuit& c, Wire ctrl, WireSpan y, WireSpan r, int shift, Wire overflow, bool subtract);

/// r <- x * y, pre-truncated: addend j is y shifted by j - frac_shift, the
/// most significant bit of x subtracts. r must be 0 and y non-negative.
void emit_mul(Circuit& c, WireSpan x, WireSpan y, WireSpan r, int frac_shift, Wire overflow);

/// r <- x * x for x >= 0 using one recycled work wire. With `ctrl` the
/// square is only added when ctrl is set (2n extra Toffolis).
void emit_square(Circuit& c, WireSpan x, WireSpan r, int frac_shift, Wire overflow, std::optional<Wire> ctrl = {});

/// ctrl ? x <- -x : nothing. `one` must be clean and is restored.
void emit_cond_negate(Circuit& c, Wire ctrl, WireSpan x, WireSpan one, Wire overflow);

void emit_cswap(Circuit& c, Wire ctrl, WireSpan a, WireSpan b);

/// x ^= k (NOT gates on set bits).
void emit_xor_const(Circuit& c, WireSpan x, std::uint64_t k);
/// x ^= k when ctrl is set (CNOTs from ctrl).
void emit_cxor_const(Circuit& c, Wire ctrl, WireSpan x, std::uint64_t k);

// Standalone circuits with declared registers.

Circuit build_add(FxFormat f);                              // a, b, carry
Circuit build_cadd(FxFormat f);                             // ctrl, a, b, carry (+ spare when n = 1)
Circuit build_const_add_inplace(FxFormat f, std::uint64_t k);  // b, dirty
Circuit build_cmp_const(FxFormat f, std::uint64_t a);       // x, out, dirty
Circuit build_mul(FxFormat f);                              // x, y, r, overflow
Circuit build_square(FxFormat f);                           // x, r, overflow
Circuit build_cond_negate(FxFormat f);                      // ctrl, x, one, overflow
Circuit build_cswap_reg(FxFormat f);                        // ctrl, a, b

// Closed-form Toffoli counts.
long long t_add(int n);
long long t_cadd(int n);
long long t_cmp(int n);
long long t_mul(int n, int p);

}  // namespace qfixed
