#include "qfixed/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qfixed {

namespace {

using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

constexpr long double kPi = std::numbers::pi_v<long double>;

long double cheb_eval(const Vec& c, long double s) {
  // Clenshaw
  long double b1 = 0, b2 = 0;
  for (Eigen::Index j = c.size() - 1; j >= 1; --j) {
    const long double b0 = 2 * s * b1 - b2 + c(j);
    b2 = b1;
    b1 = b0;
  }
  return s * b1 - b2 + c(0);
}

// Chebyshev series in s = alpha x + beta, expanded into powers of x.
std::vector<long double> cheb_to_monomial(const Vec& c, long double alpha, long double beta) {
  const auto d = static_cast<std::size_t>(c.size() - 1);
  std::vector<long double> in_s(d + 1, 0);
  std::vector<long double> tprev{1}, tcur{0, 1};
  in_s[0] += c(0);
  if (d >= 1) in_s[1] += c(1);
  for (std::size_t j = 2; j <= d; ++j) {
    std::vector<long double> tnext(j + 1, 0);
    for (std::size_t k = 0; k < tcur.size(); ++k) tnext[k + 1] += 2 * tcur[k];
    for (std::size_t k = 0; k < tprev.size(); ++k) tnext[k] -= tprev[k];
    for (std::size_t k = 0; k <= j; ++k) in_s[k] += c(static_cast<Eigen::Index>(j)) * tnext[k];
    tprev = std::move(tcur);
    tcur = std::move(tnext);
  }
  // substitute s = alpha x + beta
  std::vector<long double> out(d + 1, 0), pw{1};
  for (std::size_t k = 0; k <= d; ++k) {
    for (std::size_t i = 0; i < pw.size(); ++i) out[i] += in_s[k] * pw[i];
    std::vector<long double> next(pw.size() + 1, 0);
    for (std::size_t i = 0; i < pw.size(); ++i) {
      next[i] += beta * pw[i];
      next[i + 1] += alpha * pw[i];
    }
    pw = std::move(next);
  }
  return out;
}

struct Extremum {
  long double s;
  long double r;
};

// Maximize sign * r over [a, b] by golden-section search.
Extremum refine(const std::function<long double(long double)>& r, long double a, long double b, long double sign) {
  const long double g = (std::sqrt(5.0L) - 1) / 2;
  long double x1 = b - g * (b - a), x2 = a + g * (b - a);
  long double f1 = sign * r(x1), f2 = sign * r(x2);
  for (int it = 0; it < 60 && b - a > 1e-17L * (1 + std::fabs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = sign * r(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = sign * r(x1);
    }
  }
  return f1 > f2 ? Extremum{x1, sign * f1} : Extremum{x2, sign * f2};
}

// One extremum per maximal run of constant residual sign on a Chebyshev-spaced grid.
std::vector<Extremum> alternating_extrema(const std::function<long double(long double)>& r, int grid) {
  std::vector<long double> s(static_cast<std::size_t>(grid)), v(s.size());
  for (int k = 0; k < grid; ++k) {
    s[static_cast<std::size_t>(k)] = -std::cos(kPi * k / (grid - 1));
    v[static_cast<std::size_t>(k)] = r(s[static_cast<std::size_t>(k)]);
  }
  std::vector<Extremum> out;
  std::size_t k = 0;
  while (k < s.size()) {
    const long double sign = v[k] >= 0 ? 1 : -1;
    std::size_t best = k, j = k;
    while (j < s.size() && (v[j] >= 0) == (sign > 0)) {
      if (std::fabs(v[j]) > std::fabs(v[best])) best = j;
      ++j;
    }
    const long double a = best == 0 ? s[0] : s[best - 1];
    const long double b = best + 1 == s.size() ? s.back() : s[best + 1];
    Extremum e = refine(r, a, b, sign);
    if (sign * v[best] >= sign * e.r) e = {s[best], v[best]};
    out.push_back(e);
    k = j;
  }
  return out;
}

// Drop extrema until `want` remain, keeping alternation and the largest values.
void thin(std::vector<Extremum>& e, std::size_t want) {
  while (e.size() > want) {
    if (e.size() == want + 1) {
      if (std::fabs(e.front().r) < std::fabs(e.back().r))
        e.erase(e.begin());
      else
        e.pop_back();
      continue;
    }
    std::size_t m = 0;
    for (std::size_t i = 1; i < e.size(); ++i)
      if (std::fabs(e[i].r) < std::fabs(e[m].r)) m = i;
    if (m == 0 || m + 1 == e.size()) {
      e.erase(e.begin() + static_cast<std::ptrdiff_t>(m));
    } else {
      // neighbours share a sign once m is gone; keep the larger
      const std::size_t drop = std::fabs(e[m - 1].r) < std::fabs(e[m + 1].r) ? m - 1 : m + 1;
      e.erase(e.begin() + static_cast<std::ptrdiff_t>(std::max(m, drop)));
      e.erase(e.begin() + static_cast<std::ptrdiff_t>(std::min(m, drop)));
    }
  }
}

bool in_range(long double v, FxFormat f) { return v >= f.min_value() + f.ulp() && v <= f.max_value() - f.ulp(); }

}  // namespace

long double horner(const std::vector<long double>& coeffs, long double x) {
  long double acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

RemezResult remez(const RealFn& f, long double lo, long double hi, int d, const RemezOptions& opt) {
  if (!(lo < hi)) throw std::invalid_argument("remez needs lo < hi");
  if (d < 0) throw std::invalid_argument("negative degree");
  if (opt.max_iterations < 1) throw std::invalid_argument("need at least one iteration");
  const int N = d + 2;
  const long double mid = (lo + hi) / 2, half = (hi - lo) / 2;
  auto x_of = [&](long double s) { return std::clamp(mid + half * s, lo, hi); };

  std::vector<long double> nodes(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) nodes[static_cast<std::size_t>(i)] = -std::cos(kPi * i / (N - 1));

  RemezResult res;
  Vec c = Vec::Zero(d + 1);
  long double scale = 0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    Mat A(N, N);
    Vec rhs(N);
    for (int i = 0; i < N; ++i) {
      const long double s = nodes[static_cast<std::size_t>(i)];
      long double t0 = 1, t1 = s;
      for (int j = 0; j <= d; ++j) {
        A(i, j) = t0;
        const long double t2 = 2 * s * t1 - t0;
        t0 = t1;
        t1 = t2;
      }
      A(i, N - 1) = (i % 2 == 0) ? 1 : -1;
      rhs(i) = f(x_of(s));
      scale = std::max(scale, std::fabs(rhs(i)));
    }
    const Vec sol = A.partialPivLu().solve(rhs);
    if (!sol.allFinite()) throw std::runtime_error("remez: singular reference system");
    c = sol.head(d + 1);

    auto resid = [&](long double s) { return f(x_of(s)) - cheb_eval(c, s); };
    auto ext = alternating_extrema(resid, std::max(opt.grid_per_node * N, 64));
    long double top = 0;
    for (const auto& e : ext) top = std::max(top, std::fabs(e.r));
    res.achieved_error = top;

    const long double floor = 64 * std::numeric_limits<long double>::epsilon() * std::max(scale, 1.0L);
    if (top <= floor) {
      res.converged = true;
      res.level_spread = 0;
      res.extrema.clear();
      res.extrema_residual.clear();
      for (const auto& e : ext) {
        res.extrema.push_back(x_of(e.s));
        res.extrema_residual.push_back(e.r);
      }
      break;
    }
    if (static_cast<int>(ext.size()) < N) {
      // lost alternation: numerical noise dominates the residual
      res.converged = false;
      break;
    }
    thin(ext, static_cast<std::size_t>(N));
    long double lo_level = top;
    for (const auto& e : ext) lo_level = std::min(lo_level, std::fabs(e.r));
    res.level_spread = (top - lo_level) / top;
    res.extrema.clear();
    res.extrema_residual.clear();
    for (const auto& e : ext) {
      res.extrema.push_back(x_of(e.s));
      res.extrema_residual.push_back(e.r);
    }
    if (res.level_spread <= opt.tolerance) {
      res.converged = true;
      break;
    }
    if (opt.decide_below && (top <= *opt.decide_below || lo_level > *opt.decide_below)) break;
    for (int i = 0; i < N; ++i) nodes[static_cast<std::size_t>(i)] = ext[static_cast<std::size_t>(i)].s;
  }
  // coefficients at the noise level of f (double precision at best) would
  // blow up under the rescaling on short intervals
  const long double noise = 4 * std::numeric_limits<double>::epsilon() * std::max(scale, 1.0L);
  for (int j = 1; j <= d; ++j)
    if (std::fabs(c(j)) <= noise) c(j) = 0;
  res.coeffs = cheb_to_monomial(c, 1 / half, -mid / half);
  return res;
}

ParityReduction parity_reduce(const RealFn& f, long double lo, long double hi, std::optional<Parity> claim) {
  if (!(lo < hi)) throw std::invalid_argument("parity_reduce needs lo < hi");
  const long double X = std::max(std::fabs(lo), std::fabs(hi));
  constexpr int kSamples = 97;
  constexpr long double kTol = 1e-12L;
  bool odd = true, even = true;
  for (int i = 1; i <= kSamples; ++i) {
    const long double x = X * i / kSamples;
    long double a, b;
    try {
      a = f(x);
      b = f(-x);
    } catch (const std::domain_error&) {
      odd = even = false;
      break;
    }
    const long double tol = kTol * std::max(1.0L, std::fabs(a));
    if (std::fabs(b + a) > tol) odd = false;
    if (std::fabs(b - a) > tol) even = false;
  }
  Parity p = claim.value_or(even ? Parity::Even : odd ? Parity::Odd : Parity::None);
  if (claim && *claim == Parity::Odd && !odd) throw std::invalid_argument("function is not odd on the sampled points");
  if (claim && *claim == Parity::Even && !even) throw std::invalid_argument("function is not even on the sampled points");

  ParityReduction out;
  out.parity = p;
  switch (p) {
    case Parity::None: out.g = f; break;
    case Parity::Even:
      out.g = [f](long double u) { return f(std::sqrt(std::max(u, 0.0L))); };
      break;
    case Parity::Odd:
      out.g = [f](long double u) {
        // the limit at 0 is taken a hair to the right
        const long double x = std::sqrt(std::max(u, 1e-40L));
        return f(x) / x;
      };
      break;
  }
  return out;
}

long double Partition::certified_error() const {
  long double worst = 0;
  for (long double v : certified) worst = std::max(worst, v);
  return worst;
}

std::vector<long double> piece_errors(const RealFn& f, const PiecewisePoly& pp, int points) {
  if (points < 2) throw std::invalid_argument("need at least two points per piece");
  std::vector<long double> out;
  for (int l = 0; l < pp.pieces(); ++l) {
    const long double a = pp.breakpoints[static_cast<std::size_t>(l)];
    const long double b = pp.breakpoints[static_cast<std::size_t>(l) + 1];
    const auto& row = pp.coeffs[static_cast<std::size_t>(l)];
    long double worst = 0;
    for (int i = 0; i < points; ++i) {
      const long double t = a + (b - a) * i / (points - 1);
      const long double x = pp.parity == Parity::None ? t : std::sqrt(t);
      long double v = horner(row, t);
      if (pp.parity == Parity::Odd) v *= x;
      worst = std::max(worst, std::fabs(f(x) - v));
    }
    out.push_back(worst);
  }
  return out;
}

namespace {

struct PieceFit {
  std::vector<long double> coeffs;
  long double fit_error = 0;
  long double certified = 0;
};

class Partitioner {
 public:
  Partitioner(const RealFn& f, long double lo, long double hi, int d, long double eps, FxFormat fmt, Parity parity)
      : f_(f), d_(d), eps_(eps * (1 - 1e-9L)), fmt_(fmt), parity_(parity), signed_(lo < 0) {
    x_max_ = std::max(std::fabs(lo), std::fabs(hi));
    if (parity == Parity::None) {
      g_ = f;
      t_lo_ = lo;
      t_hi_ = hi;
    } else {
      g_ = parity_reduce(f, lo, hi, parity).g;
      t_lo_ = lo >= 0 ? lo * lo : 0;
      t_hi_ = x_max_ * x_max_;
    }
  }

  long double t_lo() const { return t_lo_; }
  long double t_hi() const { return t_hi_; }

  std::optional<PieceFit> fit(long double a, long double b) const {
    const long double T = std::max(std::fabs(a), std::fabs(b));
    const long double xp = parity_ == Parity::None ? T : std::sqrt(T);
    const long double xscale = parity_ == Parity::Odd ? xp : 1;
    // allowance without the coefficient-dependent slope term, as a first budget
    const std::vector<long double> zeros(static_cast<std::size_t>(d_ + 1), 0);
    const long double base = piece_allowance(zeros, T, xp, fmt_, parity_, signed_);
    if (base >= eps_) return std::nullopt;
    RemezOptions opt;
    opt.decide_below = (eps_ - base) / xscale;
    const RemezResult r = remez(g_, a, b, d_, opt);
    if (r.achieved_error * xscale + base > eps_) return std::nullopt;

    PieceFit pf;
    pf.coeffs = r.coeffs;
    for (long double v : pf.coeffs)
      if (!std::isfinite(v) || !in_range(v, fmt_)) return std::nullopt;
    // monomial form on a dense grid, and the Horner partial sums must stay in range
    long double worst = r.achieved_error;
    constexpr int kGrid = 1000;
    for (int i = 0; i < kGrid; ++i) {
      const long double t = a + (b - a) * i / (kGrid - 1);
      long double acc = 0;
      for (int j = d_; j >= 0; --j) {
        acc = acc * t + pf.coeffs[static_cast<std::size_t>(j)];
        if (!in_range(acc, fmt_)) return std::nullopt;
        if (j > 0 && !in_range(acc * t, fmt_)) return std::nullopt;
      }
      worst = std::max(worst, std::fabs(g_(t) - acc));
    }
    pf.fit_error = worst * xscale;
    pf.certified = pf.fit_error + piece_allowance(pf.coeffs, T, xp, fmt_, parity_, signed_);
    if (pf.certified > eps_) return std::nullopt;
    return pf;
  }

 private:
  RealFn f_, g_;
  int d_;
  long double eps_;
  FxFormat fmt_;
  Parity parity_;
  bool signed_;
  long double x_max_ = 0, t_lo_ = 0, t_hi_ = 0;
};

}  // namespace

Partition partition_domain(const RealFn& f, long double lo, long double hi, int d, long double eps, FxFormat format,
                           Parity parity) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  if (!(lo < hi)) throw std::invalid_argument("empty domain");
  if (d < 0) throw std::invalid_argument("negative degree");
  if (parity != Parity::None && lo < 0 && std::fabs(lo + hi) > format.ulp())
    throw std::invalid_argument("parity needs a symmetric or non-negative domain");
  if (lo < format.min_value() || hi > format.max_value() + format.ulp())
    throw std::invalid_argument("domain outside the fixed-point range");

  const Partitioner part(f, lo, hi, d, eps, format, parity);
  const long double ulp = format.ulp();
  const long double t_hi = part.t_hi();
  // grid index k stands for the breakpoint k * ulp
  const auto k_end = static_cast<std::int64_t>(std::ceil(t_hi / ulp));

  Partition out;
  PiecewisePoly& pp = out.poly;
  pp.format = format;
  pp.degree = d;
  pp.parity = parity;
  pp.domain_lo = lo;
  pp.domain_hi = hi;
  pp.breakpoints.push_back(part.t_lo());

  long double left = part.t_lo();
  constexpr int kMaxPieces = 1 << 16;
  while (true) {
    if (auto whole = part.fit(left, t_hi)) {
      pp.coeffs.push_back(whole->coeffs);
      out.fit_error.push_back(whole->fit_error);
      out.certified.push_back(whole->certified);
      pp.breakpoints.push_back(t_hi);
      break;
    }
    // largest k in [k_min, k_end - 1] with an admissible fit on [left, k ulp]
    std::int64_t k_lo = static_cast<std::int64_t>(std::floor(left / ulp)) + 1;
    std::int64_t k_hi = k_end - 1;
    if (k_lo > k_hi) throw std::runtime_error("no grid point left inside the last piece");
    auto best = part.fit(left, static_cast<long double>(k_lo) * ulp);
    if (!best)
      throw std::runtime_error("a single grid step at t = " + std::to_string(static_cast<double>(left)) +
                               " exceeds the error target; raise n, the degree or eps");
    while (k_lo < k_hi) {
      const std::int64_t mid = k_lo + (k_hi - k_lo + 1) / 2;
      if (auto trial = part.fit(left, static_cast<long double>(mid) * ulp)) {
        k_lo = mid;
        best = std::move(trial);
      } else {
        k_hi = mid - 1;
      }
    }
    const long double right = static_cast<long double>(k_lo) * ulp;
    pp.coeffs.push_back(best->coeffs);
    out.fit_error.push_back(best->fit_error);
    out.certified.push_back(best->certified);
    pp.breakpoints.push_back(right);
    left = right;
    if (pp.pieces() >= kMaxPieces) throw std::runtime_error("partition exceeds the piece limit");
  }
  pp.validate();
  return out;
}

}  // namespace qfixed
