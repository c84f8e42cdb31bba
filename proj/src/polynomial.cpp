#include "qfixed/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qfixed/arithmetic.hpp"

namespace qfixed {

namespace {

using nlohmann::json;

std::string fmt_ld(long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}

long double parse_ld(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  std::size_t used = 0;
  const long double v = std::stold(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::vector<std::uint64_t> bound_words(const PiecewisePoly& pp) {
  std::vector<std::uint64_t> out;
  for (int i = 1; i < pp.pieces(); ++i) out.push_back(pp.breakpoint_word(i));
  return out;
}

std::vector<std::uint64_t> column_words(const PiecewisePoly& pp, int power) {
  std::vector<std::uint64_t> out;
  for (int l = 0; l < pp.pieces(); ++l) out.push_back(pp.coeff_word(l, power));
  return out;
}

}  // namespace

std::string_view parity_name(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    default: return "none";
  }
}

Parity parse_parity(std::string_view s) {
  if (s == "none") return Parity::None;
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  throw std::invalid_argument("unknown parity '" + std::string(s) + "'");
}

int PiecewisePoly::label_bits() const { return ceil_log2(pieces()); }

void PiecewisePoly::validate() const {
  if (degree < 0) throw std::invalid_argument("negative degree");
  if (coeffs.empty()) throw std::invalid_argument("no pieces");
  if (breakpoints.size() != coeffs.size() + 1) throw std::invalid_argument("need M + 1 breakpoints for M pieces");
  if (!(domain_lo < domain_hi)) throw std::invalid_argument("empty input domain");
  if (parity != Parity::None && domain_lo < 0 && domain_hi > -domain_lo + format.ulp())
    throw std::invalid_argument("parity reduction needs a domain symmetric about 0 or x >= 0");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i - 1] < breakpoints[i])) throw std::invalid_argument("breakpoints must increase");
  for (std::size_t i = 1; i + 1 < breakpoints.size(); ++i)
    if (decode(encode(breakpoints[i], format)) != breakpoints[i])
      throw std::invalid_argument("breakpoint " + fmt_ld(breakpoints[i]) + " is not on the fixed-point grid");
  for (const auto& row : coeffs) {
    if (static_cast<int>(row.size()) != degree + 1) throw std::invalid_argument("coefficient row length != degree + 1");
    for (long double a : row)
      if (!(a >= format.min_value() && a <= format.max_value()))
        throw std::invalid_argument("coefficient " + fmt_ld(a) + " not representable");
  }
  if (pieces() > 1 && format.n < 2) throw std::invalid_argument("labels need n >= 2");
}

int PiecewisePoly::piece_of(long double t) const {
  const auto it = std::upper_bound(breakpoints.begin() + 1, breakpoints.end() - 1, t);
  return static_cast<int>(it - (breakpoints.begin() + 1));
}

long double PiecewisePoly::eval(long double x) const {
  const long double t = t_of(x);
  const auto& row = coeffs[static_cast<std::size_t>(piece_of(t))];
  long double acc = 0;
  for (auto it = row.rbegin(); it != row.rend(); ++it) acc = acc * t + *it;
  return parity == Parity::Odd ? acc * x : acc;
}

std::uint64_t PiecewisePoly::breakpoint_word(int i) const {
  std::uint64_t w = encode(breakpoints.at(static_cast<std::size_t>(i)), format).bits();
  if (parity == Parity::None && signed_input()) w ^= std::uint64_t{1} << (format.n - 1);
  return w;
}

std::uint64_t PiecewisePoly::coeff_word(int piece, int power) const {
  return encode(coeffs.at(static_cast<std::size_t>(piece)).at(static_cast<std::size_t>(power)), format).bits();
}

long double PiecewisePoly::t_bound() const {
  const long double x = std::max(std::fabs(domain_lo), std::fabs(domain_hi));
  return parity == Parity::None ? x : x * x;
}

long double PiecewisePoly::allowance() const {
  const long double x = std::max(std::fabs(domain_lo), std::fabs(domain_hi));
  long double worst = 0;
  for (int l = 0; l < pieces(); ++l) {
    const long double t = std::max(std::fabs(breakpoints[static_cast<std::size_t>(l)]),
                                   std::fabs(breakpoints[static_cast<std::size_t>(l) + 1]));
    worst = std::max(worst, piece_allowance(coeffs[static_cast<std::size_t>(l)], t, x, format, parity, signed_input()));
  }
  return worst;
}

long double piece_allowance(std::span<const long double> coeffs, long double t_abs_max, long double x_abs_max,
                            FxFormat f, Parity parity, bool signed_input) {
  const long double u = f.ulp();
  const int d = static_cast<int>(coeffs.size()) - 1;
  const long double T = std::max(t_abs_max, 1e-300L);
  long double err = 0, tp = 1;
  for (int j = 0; j <= d; ++j) {
    const bool complemented = signed_input && parity == Parity::None && (j % 2 == 1);
    err += (complemented ? 1.5L : 0.5L) * u * tp;
    if (j < d) err += f.n * u * tp;
    tp *= T;
  }
  if (parity != Parity::None) {
    long double slope = 0;
    tp = 1;
    for (int j = 1; j <= d; ++j) {
      slope += j * std::fabs(coeffs[static_cast<std::size_t>(j)]) * tp;
      tp *= T;
    }
    err += slope * f.n * u;
  }
  if (parity == Parity::Odd) err = err * x_abs_max + f.n * u;
  return err;
}

std::string to_json(const PiecewisePoly& pp) {
  json j;
  j["format"] = {{"n", pp.format.n}, {"p", pp.format.p}};
  j["degree"] = pp.degree;
  j["parity"] = std::string(parity_name(pp.parity));
  j["domain"] = {fmt_ld(pp.domain_lo), fmt_ld(pp.domain_hi)};
  json bp = json::array();
  for (long double b : pp.breakpoints) bp.push_back(fmt_ld(b));
  j["breakpoints"] = bp;
  json rows = json::array();
  for (const auto& row : pp.coeffs) {
    json r = json::array();
    for (long double a : row) r.push_back(fmt_ld(a));
    rows.push_back(r);
  }
  j["coeffs"] = rows;
  return j.dump(2);
}

PiecewisePoly piecewise_from_json(std::string_view text) {
  PiecewisePoly pp;
  try {
    const json j = json::parse(text);
    pp.format = FxFormat(j.at("format").at("n").get<int>(), j.at("format").at("p").get<int>());
    pp.degree = j.at("degree").get<int>();
    pp.parity = parse_parity(j.value("parity", std::string("none")));
    pp.domain_lo = parse_ld(j.at("domain").at(0));
    pp.domain_hi = parse_ld(j.at("domain").at(1));
    for (const auto& b : j.at("breakpoints")) pp.breakpoints.push_back(parse_ld(b));
    for (const auto& row : j.at("coeffs")) {
      std::vector<long double> r;
      for (const auto& a : row) r.push_back(parse_ld(a));
      pp.coeffs.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("piecewise polynomial json: ") + e.what());
  }
  pp.validate();
  return pp;
}

void emit_label(Circuit& c, std::span<const std::uint64_t> bounds, WireSpan t, WireSpan label, Wire anc,
                WireSpan dirty, std::span<const std::uint64_t> coef_words, WireSpan coef) {
  const std::size_t w = t.size();
  if (!coef_words.empty()) {
    if (coef_words.size() != bounds.size() + 1) throw std::invalid_argument("need one coefficient word per piece");
    emit_xor_const(c, coef, coef_words[0]);
  }
  for (std::size_t i = 1; i <= bounds.size(); ++i) {
    const std::uint64_t b = bounds[i - 1];
    if (b == 0) throw std::invalid_argument("interior breakpoint at the bottom of the word range");
    const std::uint64_t k = (w >= 64 ? 0 : (std::uint64_t{1} << w)) - b;
    const std::size_t mark = c.size();
    emit_carry_ladder(c, t, k, anc, dirty, false);
    const std::size_t ladder_end = c.size();
    emit_cxor_const(c, anc, label, (i - 1) ^ i);
    if (!coef_words.empty()) emit_cxor_const(c, anc, coef, coef_words[i - 1] ^ coef_words[i]);
    c.append_inverse(mark, ladder_end);
  }
}

void emit_next_coeffs(Circuit& c, std::span<const std::uint64_t> from, std::span<const std::uint64_t> to,
                      WireSpan label, WireSpan coef, Wire flag, WireSpan dirty) {
  if (from.size() != to.size()) throw std::invalid_argument("coefficient tables differ in length");
  const std::size_t k = label.size();
  if (k == 0) {
    emit_xor_const(c, coef, from[0] ^ to[0]);
    return;
  }
  if (k >= 3 && dirty.size() < k - 2) throw std::invalid_argument("not enough dirty wires for the label match");
  auto select = [&](std::size_t v) {
    for (std::size_t b = 0; b < k; ++b)
      if (!((v >> b) & 1U)) c.x(label[b]);
    if (k == 1) {
      c.cx(label[0], flag);
    } else if (k == 2) {
      c.ccx(label[0], label[1], flag);
    } else {
      c.mcx(label, flag, dirty.first(k - 2));
    }
    for (std::size_t b = 0; b < k; ++b)
      if (!((v >> b) & 1U)) c.x(label[b]);
  };
  for (std::size_t v = 0; v < from.size(); ++v) {
    select(v);
    emit_cxor_const(c, flag, coef, from[v] ^ to[v]);
    select(v);
  }
}

void emit_horner_step(Circuit& c, std::span<const long double> coeffs, FxFormat f, int i, WireSpan t, WireSpan src,
                      WireSpan dst, WireSpan coef, Wire overflow) {
  const int d = static_cast<int>(coeffs.size()) - 1;
  if (i < 1 || i > d) throw std::invalid_argument("Horner step outside 1..d");
  auto word = [&](int power) { return encode(coeffs[static_cast<std::size_t>(power)], f).bits(); };
  const std::uint64_t add = word(d - i);
  if (i == 1) {
    emit_xor_const(c, coef, word(d));
    emit_mul(c, coef, t, dst, f.frac_bits(), overflow);
    emit_xor_const(c, coef, word(d) ^ add);
  } else {
    emit_xor_const(c, coef, add);
    emit_mul(c, src, t, dst, f.frac_bits(), overflow);
  }
  emit_add(c, coef, dst, overflow);
  emit_xor_const(c, coef, add);
}

void emit_parallel_poly(Circuit& c, const PiecewisePoly& pp, const Register& x, const Register& out) {
  pp.validate();
  const FxFormat f = pp.format;
  const int n = f.n, d = pp.degree, k = pp.label_bits();
  if (x.len != n || out.len != n) throw std::invalid_argument("x and out must match the polynomial format");
  const bool sign_path = pp.signed_input();
  const bool odd = pp.parity == Parity::Odd;

  const Register overflow = c.allocate("overflow", 1);
  Register sign, one;
  if (sign_path) {
    sign = c.allocate("sign", 1);
    one = c.allocate("one", n, f.p);
  }
  auto negate_input = [&] {
    emit_cond_negate(c, sign[0], x.wires(), one.wires(), overflow[0]);
  };

  // registers: coefficient, iterates y_1..y_d (y_d is the output unless odd)
  Register q;
  if (odd) q = c.allocate("q", n, f.p);
  const Register& result = odd ? q : out;
  Register coef = d == 0 ? result : c.allocate("coef", n, f.p);
  std::vector<Register> iter;
  for (int i = 1; i < d; ++i) iter.push_back(c.allocate("y" + std::to_string(i), n, f.p));
  if (d >= 1) iter.push_back(result);

  const Register label = c.allocate("label", k);
  const Wire anc = c.allocate_wire("anc");
  Register u;
  if (pp.parity != Parity::None) u = c.allocate("u", n, f.p);
  Register spare_dirty;
  std::vector<Wire> label_dirty;
  if (d >= 1) {
    label_dirty = iter.front().wires();
  } else {
    spare_dirty = c.allocate("label_dirty", n);
    label_dirty = spare_dirty.wires();
  }
  label_dirty.resize(static_cast<std::size_t>(n - 1));

  const auto bounds = bound_words(pp);
  const auto top = column_words(pp, d);
  std::vector<Wire> t;
  if (pp.parity == Parity::None) {
    if (sign_path) {
      c.x(x[n - 1]);
      emit_label(c, bounds, x.wires(), label.wires(), anc, label_dirty, top, coef.wires());
      c.x(x[n - 1]);
      c.cx(x[n - 1], sign[0]);
      negate_input();
    } else {
      emit_label(c, bounds, x.wires(), label.wires(), anc, label_dirty, top, coef.wires());
    }
    t = x.wires();
  } else {
    if (sign_path) {
      c.cx(x[n - 1], sign[0]);
      negate_input();
    }
    emit_square(c, x.wires(), u.wires(), f.frac_bits(), overflow[0]);
    emit_label(c, bounds, u.wires(), label.wires(), anc, label_dirty, top, coef.wires());
    t = u.wires();
  }
  // complement a coefficient of an odd power of x when the input was negative
  auto absorb_sign = [&](int power) {
    if (sign_path && pp.parity == Parity::None && power % 2 == 1)
      for (Wire w : coef.wires()) c.cx(sign[0], w);
  };
  std::vector<Wire> mcx_dirty(t.begin(), t.end());

  for (int i = 1; i <= d; ++i) {
    const Register& dst = iter[static_cast<std::size_t>(i - 1)];
    if (i == 1) {
      absorb_sign(d);
      emit_mul(c, coef.wires(), t, dst.wires(), f.frac_bits(), overflow[0]);
      absorb_sign(d);
    } else {
      emit_mul(c, iter[static_cast<std::size_t>(i - 2)].wires(), t, dst.wires(), f.frac_bits(), overflow[0]);
    }
    emit_next_coeffs(c, column_words(pp, d - i + 1), column_words(pp, d - i), label.wires(), coef.wires(), anc,
                     mcx_dirty);
    absorb_sign(d - i);
    emit_add(c, coef.wires(), dst.wires(), overflow[0]);
    absorb_sign(d - i);
  }

  if (odd) {
    emit_mul(c, q.wires(), x.wires(), out.wires(), f.frac_bits(), overflow[0]);
    if (sign_path) emit_cond_negate(c, sign[0], out.wires(), one.wires(), overflow[0]);
  }
  if (sign_path) {
    negate_input();
    c.cx(x[n - 1], sign[0]);
  }
}

Circuit build_label(const PiecewisePoly& pp) {
  pp.validate();
  const int n = pp.format.n;
  Circuit c;
  const auto x = c.declare(c.allocate("x", n, pp.format.p));
  const auto label = c.declare(c.allocate("label", pp.label_bits()));
  const auto anc = c.declare(c.allocate("anc", 1));
  const auto dirty = c.declare(c.allocate("dirty", n - 1));
  const auto bounds = bound_words(pp);
  if (pp.parity == Parity::None && pp.signed_input()) c.x(x[n - 1]);
  emit_label(c, bounds, x.wires(), label.wires(), anc[0], dirty.wires());
  if (pp.parity == Parity::None && pp.signed_input()) c.x(x[n - 1]);
  return c;
}

Circuit build_next_coeffs(const PiecewisePoly& pp, int step) {
  pp.validate();
  if (step < 1 || step > pp.degree) throw std::invalid_argument("coefficient step outside 1..d");
  const int n = pp.format.n, k = pp.label_bits();
  Circuit c;
  const auto label = c.declare(c.allocate("label", k));
  const auto coef = c.declare(c.allocate("coef", n, pp.format.p));
  const auto flag = c.declare(c.allocate("flag", 1));
  const auto dirty = c.declare(c.allocate("dirty", std::max(k - 2, 0)));
  emit_next_coeffs(c, column_words(pp, pp.degree - step + 1), column_words(pp, pp.degree - step), label.wires(),
                   coef.wires(), flag[0], dirty.wires());
  return c;
}

Circuit build_parallel_poly(const PiecewisePoly& pp) {
  Circuit c;
  const auto x = c.declare(c.allocate("x", pp.format.n, pp.format.p));
  const auto out = c.declare(c.allocate("out", pp.format.n, pp.format.p));
  emit_parallel_poly(c, pp, x, out);
  return c;
}

Circuit build_horner(const PiecewisePoly& pp, const std::optional<PebbleSchedule>& schedule) {
  pp.validate();
  if (pp.pieces() != 1 || pp.parity != Parity::None || pp.signed_input())
    throw std::invalid_argument("Horner chain needs a single polynomial in x >= 0");
  const FxFormat f = pp.format;
  const int n = f.n, d = pp.degree;
  const auto& row = pp.coeffs.front();
  Circuit c;
  const auto x = c.declare(c.allocate("x", n, f.p));
  if (d == 0) {
    const auto out = c.declare(c.allocate("out", n, f.p));
    emit_xor_const(c, out.wires(), pp.coeff_word(0, 0));
    return c;
  }
  const auto coef = c.allocate("coef", n, f.p);
  const auto overflow = c.allocate("overflow", 1);
  const ChainStep step = [&](Circuit& cc, int node, const Register& src, const Register& dst) {
    emit_horner_step(cc, row, f, node, x.wires(), src.wires(), dst.wires(), coef.wires(), overflow[0]);
  };
  std::vector<Register> slots;
  PebbleSchedule plan;
  if (schedule) {
    if (schedule->r != d) throw std::invalid_argument("schedule length differs from the degree");
    plan = *schedule;
  } else {
    plan.m = d;
    plan.r = d;
    plan.feasible = true;
    plan.total = d;
    for (int i = 1; i <= d; ++i) plan.steps.push_back({true, i});
  }
  for (int i = 0; i < plan.m; ++i) slots.push_back(c.allocate("iter" + std::to_string(i), n, f.p));
  const Register last = apply_schedule(c, plan, x, slots, step);
  c.declare(Register{"out", last.start, n, f.p});
  return c;
}

int ceil_log2(long long v) {
  if (v < 1) throw std::invalid_argument("ceil_log2 of a non-positive value");
  int k = 0;
  while ((1LL << k) < v) ++k;
  return k;
}

long long t_fma(int n, int p) { return t_mul(n, p) + t_add(n); }
long long t_poly(int n, int d, int p) { return static_cast<long long>(d) * t_fma(n, p); }
long long t_extra(int M) { return 2LL * M * (4LL * ceil_log2(M) - 8); }
long long t_label(int M, int n) { return 4LL * M * n; }
long long t_pp(int n, int d, int p, int M) { return t_poly(n, d, p) + d * t_extra(M) + t_label(M, n); }
long long pp_qubits(int n, int d, int M) { return static_cast<long long>(d + 1) * n + ceil_log2(M) + 1; }

long long t_pp_constructed(int n, int d, int p, int M) {
  const int k = ceil_log2(M);
  const long long match = k >= 3 ? 4LL * (k - 2) : (k == 2 ? 1 : 0);
  const long long mul = t_mul(n, p) - (p <= 1 ? 1 : 0);
  return d * (mul + t_add(n) + 2LL * M * match) + (M - 1LL) * (4LL * n - 4);
}

}  // namespace qfixed
