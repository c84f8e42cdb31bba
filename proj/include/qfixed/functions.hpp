#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qfixed/approximation.hpp"
#include "qfixed/circuit.hpp"
#include "qfixed/fixed_point.hpp"
#include "qfixed/pebbling.hpp"
#include "qfixed/polynomial.hpp"

namespace qfixed {

struct NewtonConfig {
  FxFormat format{};
  int m = 2;
  bool tuned = true;
};

/// Constant of the initial guess for exponent k: 1.613 / 1.5 / 1.62 for
/// k < 0 / k = 0 / k > 0 when tuned, 1.5 otherwise.
long double guess_constant(int k, bool tuned);
/// Exponent used by the guess for an input whose leading one sits at bit i.
int guess_exponent(int bit, FxFormat f);

// Emitters. `a` holds the input (a > 0), all other registers start clean.

/// x0 <- C(k) 2^k - a 2^(3k-1) where 2^k ~ 1/sqrt(a). `work` (n wires) and
/// `copy` (n wires) and `flag` are returned clean.
void emit_invsqrt_guess(Circuit& c, WireSpan a, WireSpan x0, WireSpan work, WireSpan copy, Wire flag, Wire overflow,
                        FxFormat f, bool tuned);
/// next <- x (1.5 - h x^2) with h = a / 2 given as a view. Scratch s, t, v
/// are clean before and after.
void emit_newton_step(Circuit& c, WireSpan h, WireSpan x, WireSpan next, WireSpan s, WireSpan t, WireSpan v,
                      Wire overflow, FxFormat f);

// Standalone circuits. Declared registers: "a" input, "out" result.

Circuit build_invsqrt_guess(const NewtonConfig& cfg);  // a, out (= x0)
Circuit build_newton_iter(const NewtonConfig& cfg);    // a, x, out (= next), scratch "s", "t", "v"
/// Iterates are all kept unless a schedule pebbles them through its slots.
Circuit build_invsqrt(const NewtonConfig& cfg, const std::optional<PebbleSchedule>& schedule = std::nullopt);
Circuit build_sqrt(const NewtonConfig& cfg);

struct ArcsinConfig {
  FxFormat format{35, 2};  // needs p = 2 and x in [-1, 1]
  int m = 3;               // Newton iterations for the square root
  int degree = 7;          // odd polynomial degree on [0, 0.5)
  bool tuned = true;
  /// The inverse square root sees 2^shift z; even, so the scale undoes exactly.
  int shift = 2;
  /// Integer bits of the inverse-square-root format; chosen from n when unset.
  std::optional<int> sqrt_point;
};

struct ArcsinCircuit {
  Circuit circuit;                  // "x" input, "out" result
  std::vector<long double> coeffs;  // g(u) = arcsin(sqrt u) / sqrt u on [0, 1/4]
  long double minimax_error = 0;    // of x g(x^2) against arcsin on [0, 0.5)
  int sqrt_point = 0;
};

int arcsin_sqrt_point(const ArcsinConfig& cfg);
ArcsinCircuit build_arcsin(const ArcsinConfig& cfg);

struct SmoothCircuit {
  Partition partition;
  Circuit circuit;  // compute only: "x", "out"
};

/// Partition, parity reduction and parallel evaluation of a named function.
/// With `uncompute` the circuit is wrapped as compute, copy, uncompute and
/// the result is in "result".
SmoothCircuit build_smooth(const std::string& fname, long double lo, long double hi, int d, long double eps,
                           FxFormat format, Parity parity = Parity::None, bool uncompute = false);

/// Domain, parity and format used for the published partitioning table.
struct SmoothPreset {
  std::string name;
  long double lo, hi;
  Parity parity;
  FxFormat format;
};
const std::vector<SmoothPreset>& smooth_presets();
const SmoothPreset& smooth_preset(const std::string& name);

// Closed forms.
long long t_init(int n);
long long t_iter(int n, int p);
long long t_invsqrt(int n, int m, int p);
long long t_arcsin(int n, int m, int p, int d);
long long invsqrt_qubits(int n, int m);

// Sweeps.
struct SweepRow {
  long double x = 0;          // decoded input
  std::int64_t circuit_raw = 0;
  int circuit_frac_bits = 0;
  long double circuit = 0;    // decoded output
  long double reference = 0;  // float reference at x
  long double abs_error = 0;
};

/// N equidistant points of [lo, hi], encoded into `in`, run through `c`,
/// compared against ref_float(fname) at the encoded input. Rows keep x order.
std::vector<SweepRow> sweep_circuit(const Circuit& c, const Register& in, const Register& out,
                                    const std::string& fname, long double lo, long double hi, int N);
long double max_abs_error(const std::vector<SweepRow>& rows);

}  // namespace qfixed
