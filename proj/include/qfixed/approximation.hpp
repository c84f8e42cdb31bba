#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qfixed/fixed_point.hpp"
#include "qfixed/polynomial.hpp"

namespace qfixed {

using RealFn = std::function<long double(long double)>;

struct RemezOptions {
  int max_iterations = 50;
  /// Converged once the extremal magnitudes agree to this relative spread.
  long double tolerance = 0.01L;
  /// Residual sampling density per degree of freedom.
  int grid_per_node = 48;
  /// When set, stop as soon as the fit is known to be below (or above) this
  /// error; the returned fit then only decides the comparison.
  std::optional<long double> decide_below;
};

struct RemezResult {
  std::vector<long double> coeffs;  // ascending powers of x
  long double achieved_error = 0;   // max |f - P| over the fit domain
  long double level_spread = 0;     // (max - min) / max of the extremal magnitudes
  bool converged = false;
  int iterations = 0;
  /// Alternating extrema of the final residual.
  std::vector<long double> extrema;
  std::vector<long double> extrema_residual;
};

/// Degree-d minimax polynomial of f on [lo, hi] by the exchange algorithm.
/// Non-convergence within the iteration cap is reported via `converged`.
RemezResult remez(const RealFn& f, long double lo, long double hi, int d, const RemezOptions& opt = {});

/// Evaluate ascending coefficients at x (Horner, long double).
long double horner(const std::vector<long double>& coeffs, long double x);

struct ParityReduction {
  RealFn g;  // function of u = x^2
  Parity parity = Parity::None;
};

/// Odd f gives g(u) = f(sqrt u) / sqrt u, even f gives g(u) = f(sqrt u),
/// otherwise g = f. Without a claim the parity is detected by sampling
/// f(-x) and f(x); a claim the samples contradict throws.
ParityReduction parity_reduce(const RealFn& f, long double lo, long double hi,
                              std::optional<Parity> claim = std::nullopt);

struct Partition {
  PiecewisePoly poly;
  std::vector<long double> fit_error;  // per piece, max |f - P| in x
  std::vector<long double> certified;  // fit_error + evaluation allowance
  long double certified_error() const;
};

/// Greedy left-to-right cover of [lo, hi) by the largest grid-aligned pieces
/// whose degree-d fit plus fixed-point evaluation allowance stays within eps.
/// With parity the pieces live in u = x^2. Throws std::runtime_error when a
/// single grid step cannot meet eps or a fit leaves the format's range.
Partition partition_domain(const RealFn& f, long double lo, long double hi, int d, long double eps, FxFormat format,
                           Parity parity = Parity::None);

/// Max |f(x) - pp.eval(x)| on `points` equidistant x per piece.
std::vector<long double> piece_errors(const RealFn& f, const PiecewisePoly& pp, int points = 1000);

}  // namespace qfixed
