#include "qfixed/functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qfixed/arithmetic.hpp"
#include "qfixed/simulator.hpp"

namespace qfixed {

namespace {

std::vector<Wire> slice(WireSpan w, std::size_t from, std::size_t to) { return {w.begin() + from, w.begin() + to}; }

void check_newton(const NewtonConfig& cfg) {
  if (cfg.m < 1) throw std::invalid_argument("need at least one Newton iteration");
  if (cfg.format.n < 2) throw std::invalid_argument("inverse square root needs n >= 2");
}

struct Chain {
  Register out;
  std::vector<Register> iterates;
};

// Guess plus m Newton steps on the input view `a`; everything but the
// iterates is returned clean.
Chain emit_invsqrt_chain(Circuit& c, WireSpan a, FxFormat f, int m, bool tuned, Wire overflow,
                         const std::optional<PebbleSchedule>& schedule) {
  const int n = f.n;
  const Register x0 = c.allocate("x0", n, f.p);
  const Register s = c.allocate("s", n, f.p), t = c.allocate("t", n, f.p), v = c.allocate("v", n, f.p);
  const Wire zero = c.allocate_wire("zero");
  std::vector<Wire> h = slice(a, 1, a.size());
  h.push_back(zero);

  Chain chain;
  std::vector<Register> slots;
  PebbleSchedule plan;
  if (schedule) {
    if (schedule->r != m) throw std::invalid_argument("schedule length differs from the iteration count");
    plan = *schedule;
  } else {
    plan.m = m;
    plan.r = m;
    plan.feasible = true;
    plan.total = m;
    for (int i = 1; i <= m; ++i) plan.steps.push_back({true, i});
  }
  for (int i = 0; i < plan.m; ++i) slots.push_back(c.allocate("x" + std::to_string(i + 1), n, f.p));

  emit_invsqrt_guess(c, a, x0.wires(), s.wires(), t.wires(), v[0], overflow, f, tuned);
  const ChainStep step = [&](Circuit& cc, int, const Register& src, const Register& dst) {
    emit_newton_step(cc, h, src.wires(), dst.wires(), s.wires(), t.wires(), v.wires(), overflow, f);
  };
  chain.out = apply_schedule(c, plan, x0, slots, step);
  chain.iterates.push_back(x0);
  for (const auto& r : slots) chain.iterates.push_back(r);
  return chain;
}

RealFn named_fn(const std::string& name) {
  ref_float(name, 0.5);  // unknown names throw here
  return [name](long double x) { return static_cast<long double>(ref_float(name, static_cast<double>(x))); };
}

}  // namespace

long double guess_constant(int k, bool tuned) {
  if (!tuned || k == 0) return 1.5L;
  return k < 0 ? 1.613L : 1.62L;
}

int guess_exponent(int bit, FxFormat f) {
  const int e = bit - f.frac_bits();
  // k = -ceil(e / 2) keeps a 2^(2k) in [1/2, 2)
  const int half_up = e >= 0 ? (e + 1) / 2 : -((-e) / 2);
  return -half_up;
}

void emit_invsqrt_guess(Circuit& c, WireSpan a, WireSpan x0, WireSpan work, WireSpan copy, Wire flag, Wire overflow,
                        FxFormat f, bool tuned) {
  const int n = f.n;
  if (static_cast<int>(a.size()) != n || static_cast<int>(x0.size()) != n || static_cast<int>(work.size()) != n ||
      static_cast<int>(copy.size()) != n)
    throw std::invalid_argument("guess registers must have the format width");
  auto mark_first_one = [&](int i) {
    c.x(flag);
    c.ccx(a[static_cast<std::size_t>(i)], flag, work[static_cast<std::size_t>(i)]);
    c.x(flag);
    c.cx(work[static_cast<std::size_t>(i)], flag);
  };
  for (int i = n - 1; i >= 0; --i) {
    mark_first_one(i);
    const Wire r = work[static_cast<std::size_t>(i)];
    const int k = guess_exponent(i, f);
    emit_cxor_const(c, r, x0, encode(guess_constant(k, tuned) * std::ldexp(1.0L, k), f).bits());
    // a 2^(3k-1) as a shifted copy; bits leaving the word are dropped
    const int shift = 3 * k - 1;
    auto copy_shifted = [&] {
      for (int j = 0; j < n; ++j) {
        const int src = j - shift;
        if (src >= 0 && src < n) c.cx(a[static_cast<std::size_t>(src)], copy[static_cast<std::size_t>(j)]);
      }
    };
    copy_shifted();
    emit_csub(c, r, copy, x0, overflow);
    copy_shifted();
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t mark = c.size();
    mark_first_one(i);
    c.reverse_tail(mark);
  }
}

void emit_newton_step(Circuit& c, WireSpan h, WireSpan x, WireSpan next, WireSpan s, WireSpan t, WireSpan v,
                      Wire overflow, FxFormat f) {
  const int fb = f.frac_bits();
  const std::size_t m0 = c.size();
  emit_square(c, x, s, fb, overflow);
  const std::size_t m1 = c.size();
  emit_mul(c, s, h, t, fb, overflow);
  const std::size_t m2 = c.size();
  emit_xor_const(c, v, encode(1.5L, f).bits());
  emit_sub(c, t, v, overflow);
  const std::size_t m3 = c.size();
  emit_mul(c, v, x, next, fb, overflow);
  c.append_inverse(m2, m3);
  c.append_inverse(m1, m2);
  c.append_inverse(m0, m1);
}

Circuit build_invsqrt_guess(const NewtonConfig& cfg) {
  check_newton(cfg);
  const FxFormat f = cfg.format;
  Circuit c;
  const auto a = c.declare(c.allocate("a", f.n, f.p));
  const auto out = c.declare(c.allocate("out", f.n, f.p));
  const auto work = c.declare(c.allocate("work", f.n));
  const auto copy = c.declare(c.allocate("copy", f.n));
  const auto flag = c.declare(c.allocate("flag", 1));
  const auto overflow = c.declare(c.allocate("overflow", 1));
  emit_invsqrt_guess(c, a.wires(), out.wires(), work.wires(), copy.wires(), flag[0], overflow[0], f, cfg.tuned);
  return c;
}

Circuit build_newton_iter(const NewtonConfig& cfg) {
  check_newton(cfg);
  const FxFormat f = cfg.format;
  Circuit c;
  const auto a = c.declare(c.allocate("a", f.n, f.p));
  const auto x = c.declare(c.allocate("x", f.n, f.p));
  const auto out = c.declare(c.allocate("out", f.n, f.p));
  const auto s = c.declare(c.allocate("s", f.n, f.p));
  const auto t = c.declare(c.allocate("t", f.n, f.p));
  const auto v = c.declare(c.allocate("v", f.n, f.p));
  const auto zero = c.declare(c.allocate("zero", 1));
  const auto overflow = c.declare(c.allocate("overflow", 1));
  std::vector<Wire> h = slice(a.wires(), 1, static_cast<std::size_t>(f.n));
  h.push_back(zero[0]);
  emit_newton_step(c, h, x.wires(), out.wires(), s.wires(), t.wires(), v.wires(), overflow[0], f);
  return c;
}

Circuit build_invsqrt(const NewtonConfig& cfg, const std::optional<PebbleSchedule>& schedule) {
  check_newton(cfg);
  const FxFormat f = cfg.format;
  Circuit c;
  const auto a = c.declare(c.allocate("a", f.n, f.p));
  const auto overflow = c.allocate("overflow", 1);
  const Chain chain = emit_invsqrt_chain(c, a.wires(), f, cfg.m, cfg.tuned, overflow[0], schedule);
  c.declare(Register{"out", chain.out.start, f.n, f.p});
  return c;
}

Circuit build_sqrt(const NewtonConfig& cfg) {
  check_newton(cfg);
  const FxFormat f = cfg.format;
  Circuit c;
  const auto a = c.declare(c.allocate("a", f.n, f.p));
  const auto out = c.declare(c.allocate("out", f.n, f.p));
  const auto overflow = c.allocate("overflow", 1);
  const Chain chain = emit_invsqrt_chain(c, a.wires(), f, cfg.m, cfg.tuned, overflow[0], std::nullopt);
  // a = 0 leaves the guess and every iterate at 0, so the product is 0 too
  emit_mul(c, chain.out.wires(), a.wires(), out.wires(), f.frac_bits(), overflow[0]);
  return c;
}

int arcsin_sqrt_point(const ArcsinConfig& cfg) {
  if (cfg.sqrt_point) return *cfg.sqrt_point;
  const int n = cfg.format.n;
  // smallest point position whose guess 2^k stays representable for every input
  int q = (n + 2) / 3 + 1;
  return std::max(q, cfg.format.p + cfg.shift);
}

ArcsinCircuit build_arcsin(const ArcsinConfig& cfg) {
  const FxFormat f = cfg.format;
  const int n = f.n;
  if (f.p != 2) throw std::invalid_argument("arcsine needs a format with p = 2");
  if (n < 8) throw std::invalid_argument("arcsine needs n >= 8");
  if (cfg.degree < 3 || cfg.degree % 2 == 0) throw std::invalid_argument("arcsine degree must be odd and >= 3");
  if (cfg.m < 1) throw std::invalid_argument("need at least one Newton iteration");
  if (cfg.shift < 0 || cfg.shift % 2 != 0) throw std::invalid_argument("square-root shift must be even and >= 0");
  const int q = arcsin_sqrt_point(cfg);
  const int pad = q - f.p - cfg.shift;
  if (q >= n || pad < 0) throw std::invalid_argument("square-root point position out of range");
  const FxFormat fs(n, q);
  const int D = (cfg.degree - 1) / 2;

  ArcsinCircuit out;
  out.sqrt_point = q;
  const RealFn g = parity_reduce(named_fn("arcsin"), 0, 0.5L, Parity::Odd).g;
  const RemezResult fit = remez(g, 0, 0.25L, D);
  out.coeffs = fit.coeffs;
  out.minimax_error = 0.5L * fit.achieved_error;

  Circuit& c = out.circuit;
  const auto x = c.declare(c.allocate("x", n, f.p));
  const auto result = c.declare(c.allocate("out", n, f.p));
  const auto sgn = c.allocate("sign", 1);
  const auto one = c.allocate("one", n, f.p);
  const auto overflow = c.allocate("overflow", 1);
  const auto a = c.allocate("small", 1);
  const auto z = c.allocate("z", n, f.p);
  const auto pin = c.allocate("pin", n, f.p);
  const auto coef = c.allocate("coef", n, f.p);
  std::vector<Register> ys;
  for (int i = 1; i <= D; ++i) ys.push_back(c.allocate("y" + std::to_string(i), n, f.p));
  const auto R = c.allocate("root", n, f.p);
  const auto T = c.allocate("prod", n, f.p);
  const Register pads = pad > 0 ? c.allocate("pad", pad) : Register{};

  const Wire sign_bit = x[n - 1];
  // |x| with the sign copied out
  c.cx(sign_bit, sgn[0]);
  emit_cond_negate(c, sgn[0], x.wires(), one.wires(), overflow[0]);

  // small = [x < 1/2]: both bits of weight 1 and 1/2 clear
  c.x(x[n - 2]);
  c.x(x[n - 3]);
  c.ccx(x[n - 2], x[n - 3], a[0]);
  c.x(x[n - 2]);
  c.x(x[n - 3]);

  // z = (1 - x) / 2
  c.x(z[n - 3]);
  emit_sub(c, slice(x.wires(), 1, static_cast<std::size_t>(n)), slice(z.wires(), 0, static_cast<std::size_t>(n - 1)),
           z[n - 1]);

  // polynomial input: z when not small, x^2 when small
  const std::size_t pin_begin = c.size();
  c.x(a[0]);
  for (int j = 0; j < n; ++j) c.ccx(a[0], z[j], pin[j]);
  c.x(a[0]);
  emit_square(c, x.wires(), pin.wires(), f.frac_bits(), overflow[0], a[0]);
  const std::size_t pin_end = c.size();

  // Horner on pin; keep only the last iterate
  std::vector<std::pair<std::size_t, std::size_t>> steps;
  for (int i = 1; i <= D; ++i) {
    const std::size_t mark = c.size();
    const std::vector<Wire> src = i == 1 ? std::vector<Wire>{} : ys[static_cast<std::size_t>(i - 2)].wires();
    emit_horner_step(c, out.coeffs, f, i, pin.wires(), src, ys[static_cast<std::size_t>(i - 1)].wires(), coef.wires(),
                     overflow[0]);
    steps.emplace_back(mark, c.size());
  }
  for (int i = D - 1; i >= 1; --i)
    c.append_inverse(steps[static_cast<std::size_t>(i - 1)].first, steps[static_cast<std::size_t>(i - 1)].second);
  c.append_inverse(pin_begin, pin_end);
  const Register& Q = ys.back();

  // sqrt z = z / sqrt z, the inverse root taken of 2^shift z in the wider format
  std::vector<Wire> view = slice(z.wires(), static_cast<std::size_t>(pad), static_cast<std::size_t>(n));
  for (int j = 0; j < pad; ++j) view.push_back(pads[j]);
  const Chain chain = emit_invsqrt_chain(c, view, fs, cfg.m, cfg.tuned, overflow[0], std::nullopt);
  emit_mul(c, chain.out.wires(), z.wires(), R.wires(), fs.frac_bits() - cfg.shift / 2, overflow[0]);

  // T = Q * (x when small, sqrt z otherwise)
  emit_cswap(c, a[0], x.wires(), R.wires());
  emit_mul(c, Q.wires(), R.wires(), T.wires(), f.frac_bits(), overflow[0]);
  emit_cswap(c, a[0], x.wires(), R.wires());

  // out = pi/2 - 2T when not small, T when small
  c.x(a[0]);
  emit_cxor_const(c, a[0], result.wires(), encode(std::numbers::pi_v<long double> / 2, f).bits());
  emit_csub(c, a[0], slice(T.wires(), 0, static_cast<std::size_t>(n - 1)),
            slice(result.wires(), 1, static_cast<std::size_t>(n)), overflow[0]);
  c.x(a[0]);
  for (int j = 0; j < n; ++j) c.ccx(a[0], T[j], result[j]);

  emit_cond_negate(c, sgn[0], result.wires(), one.wires(), overflow[0]);
  emit_cond_negate(c, sgn[0], x.wires(), one.wires(), overflow[0]);
  c.cx(sign_bit, sgn[0]);
  return out;
}

const std::vector<SmoothPreset>& smooth_presets() {
  static const std::vector<SmoothPreset> presets = {
      {"tanh", -4, 4, Parity::None, FxFormat(64, 8)},
      {"gauss", -4, 4, Parity::Even, FxFormat(64, 6)},
      {"sin", 0, std::numbers::pi_v<long double> / 2, Parity::None, FxFormat(64, 8)},
      {"exp_neg", 0, 8, Parity::None, FxFormat(64, 6)},
      {"arcsin", -0.5L, 0.5L, Parity::Odd, FxFormat(64, 8)},
  };
  return presets;
}

const SmoothPreset& smooth_preset(const std::string& name) {
  for (const auto& p : smooth_presets())
    if (p.name == name) return p;
  throw std::invalid_argument("no smooth-function preset for '" + name + "'");
}

SmoothCircuit build_smooth(const std::string& fname, long double lo, long double hi, int d, long double eps,
                           FxFormat format, Parity parity, bool uncompute) {
  SmoothCircuit out;
  out.partition = partition_domain(named_fn(fname), lo, hi, d, eps, format, parity);
  out.circuit = build_parallel_poly(out.partition.poly);
  if (uncompute) out.circuit = with_uncompute(out.circuit, "out");
  return out;
}

long long t_init(int n) { return 3LL * n * n + 5LL * n; }
long long t_iter(int n, int p) { return 5 * t_mul(n, p) + 2 * t_add(n); }
long long t_invsqrt(int n, int m, int p) { return t_init(n) + m * t_iter(n, p); }

long long t_arcsin(int n, int m, int p, int d) {
  const long long N = n, P = p;
  return d * (3 * N * N + N * (6 * P + 7) - 6 * (P - 1) * P - 2) + m * (N * (15 * N + 30 * P + 23) - 30 * P * (P - 1) - 4) +
         9 * (N + 1) * P + 9 * N * (N + 1) / 2 + 6 * N * N + 28 * N - 9 * P * P + 2;
}

long long invsqrt_qubits(int n, int m) { return static_cast<long long>(n) * (m + 4); }

std::vector<SweepRow> sweep_circuit(const Circuit& c, const Register& in, const Register& out,
                                    const std::string& fname, long double lo, long double hi, int N) {
  if (N < 2) throw std::invalid_argument("a sweep needs N >= 2");
  if (!(lo < hi)) throw std::invalid_argument("a sweep needs lo < hi");
  const FxFormat fin = in.format(), fout = out.format();
  std::vector<std::uint64_t> inputs;
  inputs.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) inputs.push_back(encode(lo + (hi - lo) * i / (N - 1), fin).bits());
  const auto outputs = evaluate_words(c, in, out, inputs);
  std::vector<SweepRow> rows(static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SweepRow& r = rows[i];
    r.x = decode(FxWord(fin, inputs[i]));
    const FxWord w(fout, outputs[i]);
    r.circuit_raw = w.raw();
    r.circuit_frac_bits = fout.frac_bits();
    r.circuit = decode(w);
    r.reference = ref_float(fname, static_cast<double>(r.x));
    r.abs_error = std::fabs(r.circuit - r.reference);
  }
  return rows;
}

long double max_abs_error(const std::vector<SweepRow>& rows) {
  long double worst = 0;
  for (const auto& r : rows) worst = std::max(worst, r.abs_error);
  return worst;
}

}  // namespace qfixed
