#include "qfixed/arithmetic.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace qfixed {

namespace {

void require_distinct(std::vector<Wire> wires, const char* what) {
  std::sort(wires.begin(), wires.end());
  if (std::adjacent_find(wires.begin(), wires.end()) != wires.end()) {
    throw std::invalid_argument(std::string(what) + ": overlapping wires");
  }
}

std::vector<Wire> concat(std::initializer_list<WireSpan> parts) {
  std::vector<Wire> out;
  for (auto s : parts) out.insert(out.end(), s.begin(), s.end());
  return out;
}

bool bit_of(std::uint64_t k, std::size_t i) { return i < 64 && ((k >> i) & 1U); }

// Ripple adder with carry-out and no ancilla; when ctrl is given the
// addition only happens if ctrl is set.
void ripple_add(Circuit& c, std::optional<Wire> ctrl, WireSpan a, WireSpan b, Wire z, std::optional<Wire> spare) {
  const std::size_t w = a.size();
  if (w == 0 || b.size() != w) throw std::invalid_argument("adder operands must have equal nonzero width");
  {
    auto all = concat({a, b});
    all.push_back(z);
    if (ctrl) all.push_back(*ctrl);
    require_distinct(all, "adder");
  }
  auto A = [&](std::size_t i) { return i < w ? a[i] : z; };
  auto cx = [&](Wire src, Wire dst, bool controlled) {
    if (controlled) {
      c.ccx(*ctrl, src, dst);
    } else {
      c.cx(src, dst);
    }
  };
  const bool ctl = ctrl.has_value();

  for (std::size_t i = 1; i < w; ++i) c.cx(a[i], b[i]);
  for (std::size_t i = w - 1; i >= 1; --i) cx(A(i), A(i + 1), ctl && i == w - 1);
  for (std::size_t i = 0; i < w; ++i) {
    if (ctl && i == w - 1) {
      Wire dirty = 0;
      if (w >= 2) {
        dirty = b[0];
      } else if (spare) {
        dirty = *spare;
      } else {
        throw std::invalid_argument("controlled width-1 adder needs a spare wire");
      }
      const Wire controls[3] = {*ctrl, a[i], b[i]};
      const Wire dirty_list[1] = {dirty};
      c.mcx(controls, z, dirty_list);
    } else {
      c.ccx(a[i], b[i], A(i + 1));
    }
  }
  for (std::size_t i = w - 1; i >= 1; --i) {
    cx(a[i], b[i], ctl);
    c.ccx(a[i - 1], b[i - 1], a[i]);
  }
  for (std::size_t i = 1; i + 1 < w; ++i) c.cx(a[i], a[i + 1]);
  for (std::size_t i = 0; i < w; ++i) cx(a[i], b[i], ctl && i == 0);
}

// Q(j) of the carry ladder, expanded iteratively.
void ladder_half(Circuit& c, WireSpan x, std::uint64_t k, std::size_t j, WireSpan g_low, Wire target) {
  const std::size_t w = x.size();
  auto G = [&](std::size_t i) { return i == j + 1 ? target : g_low[i - 1]; };
  (void)w;
  auto U = [&](std::size_t i) {
    const bool flip = bit_of(k, i);
    if (flip) c.x(x[i]);
    c.ccx(x[i], G(i), G(i + 1));
    if (flip) c.x(x[i]);
  };
  auto A = [&](std::size_t i) {
    if (bit_of(k, i)) c.cx(x[i], G(i + 1));
  };
  for (std::size_t i = j; i >= 1; --i) U(i);
  if (bit_of(k, 0)) c.cx(x[0], G(1));
  for (std::size_t i = 1; i <= j; ++i) {
    U(i);
    A(i);
  }
}

}  // namespace

void emit_add(Circuit& c, WireSpan a, WireSpan b, Wire carry) { ripple_add(c, std::nullopt, a, b, carry, std::nullopt); }

void emit_sub(Circuit& c, WireSpan a, WireSpan b, Wire carry) {
  const std::size_t mark = c.size();
  emit_add(c, a, b, carry);
  c.reverse_tail(mark);
}

void emit_cadd(Circuit& c, Wire ctrl, WireSpan a, WireSpan b, Wire carry, std::optional<Wire> spare) {
  ripple_add(c, ctrl, a, b, carry, spare);
}

void emit_csub(Circuit& c, Wire ctrl, WireSpan a, WireSpan b, Wire carry, std::optional<Wire> spare) {
  const std::size_t mark = c.size();
  emit_cadd(c, ctrl, a, b, carry, spare);
  c.reverse_tail(mark);
}

void emit_carry_ladder(Circuit& c, WireSpan x, std::uint64_t k, Wire target, WireSpan dirty, bool restore) {
  const std::size_t w = x.size();
  if (w == 0) return;
  if (dirty.size() < w - 1) throw std::invalid_argument("carry ladder needs |x| - 1 dirty wires");
  auto g = dirty.first(w - 1);
  {
    auto all = concat({x, g});
    all.push_back(target);
    require_distinct(all, "carry ladder");
  }
  ladder_half(c, x, k, w - 1, g, target);
  if (restore && w >= 2) ladder_half(c, x, k, w - 2, g, g[w - 2]);
}

void emit_cmp_const(Circuit& c, WireSpan x, std::uint64_t a, Wire out, WireSpan dirty) {
  const std::size_t w = x.size();
  if (a == 0) return;
  if (w < 64 && a >= (std::uint64_t{1} << w)) throw std::invalid_argument("comparison constant wider than register");
  // x + (2^w - a) carries exactly when x >= a
  const std::uint64_t k = (w == 64) ? (~a + 1) : ((std::uint64_t{1} << w) - a);
  emit_carry_ladder(c, x, k, out, dirty, true);
  c.x(out);
}

void emit_const_add_inplace(Circuit& c, std::uint64_t k, WireSpan b, WireSpan dirty) {
  const std::size_t w = b.size();
  if (w == 0) return;
  if (dirty.size() < w - 1) throw std::invalid_argument("constant adder needs w - 1 dirty wires");
  require_distinct(concat({b, dirty.first(w - 1)}), "constant adder");
  for (std::size_t i = w - 1; i >= 1; --i) {
    const std::uint64_t low = i >= 64 ? k : (k & ((std::uint64_t{1} << i) - 1));
    if (low != 0) emit_carry_ladder(c, b.first(i), low, b[i], dirty, true);
    if (bit_of(k, i)) c.x(b[i]);
  }
  if (bit_of(k, 0)) c.x(b[0]);
}

void emit_shifted_cadd(Circuit& c, Wire ctrl, WireSpan y, WireSpan r, int shift, Wire overflow, bool subtract) {
  const int n = static_cast<int>(r.size());
  if (static_cast<int>(y.size()) != n) throw std::invalid_argument("shifted add operands must share width");
  std::vector<Wire> operand, target;
  Wire carry = overflow;
  Register pad;
  if (shift >= 0) {
    if (shift >= n) return;
    operand.assign(y.begin(), y.begin() + (n - shift));
    target.assign(r.begin() + shift, r.end());
  } else {
    const int t = -shift;
    if (t >= n) return;
    operand.assign(y.begin() + t, y.end());
    if (!subtract) {
      target.assign(r.begin(), r.begin() + (n - t));
      carry = r[static_cast<std::size_t>(n - t)];
    } else {
      // a subtraction borrows through the whole register: zero-extend the operand
      pad = c.allocate("pad", t);
      for (int i = 0; i < t; ++i) operand.push_back(pad[i]);
      target.assign(r.begin(), r.end());
    }
  }
  std::optional<Wire> spare;
  Register spare_reg;
  if (operand.size() == 1) {
    const Wire used[4] = {ctrl, operand[0], target[0], carry};
    auto free_of = [&](Wire w) { return std::find(std::begin(used), std::end(used), w) == std::end(used); };
    for (Wire w : r) {
      if (free_of(w)) {
        spare = w;
        break;
      }
    }
    if (!spare) {
      for (Wire w : y) {
        if (free_of(w)) {
          spare = w;
          break;
        }
      }
    }
    if (!spare) {
      spare_reg = c.allocate("spare", 1);
      spare = spare_reg.start;
    }
  }
  if (subtract) {
    emit_csub(c, ctrl, operand, target, carry, spare);
  } else {
    emit_cadd(c, ctrl, operand, target, carry, spare);
  }
  c.release(spare_reg);
  c.release(pad);
}

void emit_mul(Circuit& c, WireSpan x, WireSpan y, WireSpan r, int frac_shift, Wire overflow) {
  const std::size_t n = x.size();
  if (y.size() != n || r.size() != n) throw std::invalid_argument("multiplier registers must share width");
  {
    auto all = concat({x, y, r});
    all.push_back(overflow);
    require_distinct(all, "multiplier");
  }
  for (std::size_t j = 0; j < n; ++j) {
    emit_shifted_cadd(c, x[j], y, r, static_cast<int>(j) - frac_shift, overflow, j == n - 1);
  }
}

void emit_square(Circuit& c, WireSpan x, WireSpan r, int frac_shift, Wire overflow, std::optional<Wire> ctrl) {
  const std::size_t n = x.size();
  if (r.size() != n) throw std::invalid_argument("squarer registers must share width");
  {
    auto all = concat({x, r});
    all.push_back(overflow);
    if (ctrl) all.push_back(*ctrl);
    require_distinct(all, "squarer");
  }
  const Wire work = c.allocate_wire("square_work");
  for (std::size_t j = 0; j < n; ++j) {
    if (ctrl) {
      c.ccx(*ctrl, x[j], work);
    } else {
      c.cx(x[j], work);
    }
    emit_shifted_cadd(c, work, x, r, static_cast<int>(j) - frac_shift, overflow, j == n - 1);
    if (ctrl) {
      c.ccx(*ctrl, x[j], work);
    } else {
      c.cx(x[j], work);
    }
  }
  c.release(work);
}

void emit_cond_negate(Circuit& c, Wire ctrl, WireSpan x, WireSpan one, Wire overflow) {
  if (one.size() != x.size()) throw std::invalid_argument("negation helper must match register width");
  for (Wire w : x) c.cx(ctrl, w);
  c.cx(ctrl, one[0]);
  emit_add(c, one, x, overflow);
  c.cx(ctrl, one[0]);
}

void emit_cswap(Circuit& c, Wire ctrl, WireSpan a, WireSpan b) {
  if (a.size() != b.size()) throw std::invalid_argument("swapped registers must share width");
  for (std::size_t i = 0; i < a.size(); ++i) c.cswap(ctrl, a[i], b[i]);
}

void emit_xor_const(Circuit& c, WireSpan x, std::uint64_t k) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (bit_of(k, i)) c.x(x[i]);
  }
}

void emit_cxor_const(Circuit& c, Wire ctrl, WireSpan x, std::uint64_t k) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (bit_of(k, i)) c.cx(ctrl, x[i]);
  }
}

namespace {

Register declare_new(Circuit& c, const char* name, int len, int p = 0) { return c.declare(c.allocate(name, len, p)); }

}  // namespace

Circuit build_add(FxFormat f) {
  Circuit c;
  const auto a = declare_new(c, "a", f.n, f.p);
  const auto b = declare_new(c, "b", f.n, f.p);
  const auto carry = declare_new(c, "carry", 1);
  emit_add(c, a.wires(), b.wires(), carry.start);
  return c;
}

Circuit build_cadd(FxFormat f) {
  Circuit c;
  const auto ctrl = declare_new(c, "ctrl", 1);
  const auto a = declare_new(c, "a", f.n, f.p);
  const auto b = declare_new(c, "b", f.n, f.p);
  const auto carry = declare_new(c, "carry", 1);
  std::optional<Wire> spare;
  if (f.n == 1) spare = declare_new(c, "spare", 1).start;
  emit_cadd(c, ctrl.start, a.wires(), b.wires(), carry.start, spare);
  return c;
}

Circuit build_const_add_inplace(FxFormat f, std::uint64_t k) {
  Circuit c;
  const auto b = declare_new(c, "b", f.n, f.p);
  const auto dirty = declare_new(c, "dirty", f.n - 1);
  emit_const_add_inplace(c, k & f.mask(), b.wires(), dirty.wires());
  return c;
}

Circuit build_cmp_const(FxFormat f, std::uint64_t a) {
  Circuit c;
  const auto x = declare_new(c, "x", f.n, f.p);
  const auto out = declare_new(c, "out", 1);
  const auto dirty = declare_new(c, "dirty", f.n - 1);
  emit_cmp_const(c, x.wires(), a & f.mask(), out.start, dirty.wires());
  return c;
}

Circuit build_mul(FxFormat f) {
  Circuit c;
  const auto x = declare_new(c, "x", f.n, f.p);
  const auto y = declare_new(c, "y", f.n, f.p);
  const auto r = declare_new(c, "r", f.n, f.p);
  const auto overflow = declare_new(c, "overflow", 1);
  emit_mul(c, x.wires(), y.wires(), r.wires(), f.frac_bits(), overflow.start);
  return c;
}

Circuit build_square(FxFormat f) {
  Circuit c;
  const auto x = declare_new(c, "x", f.n, f.p);
  const auto r = declare_new(c, "r", f.n, f.p);
  const auto overflow = declare_new(c, "overflow", 1);
  emit_square(c, x.wires(), r.wires(), f.frac_bits(), overflow.start);
  return c;
}

Circuit build_cond_negate(FxFormat f) {
  Circuit c;
  const auto ctrl = declare_new(c, "ctrl", 1);
  const auto x = declare_new(c, "x", f.n, f.p);
  const auto one = declare_new(c, "one", f.n, f.p);
  const auto overflow = declare_new(c, "overflow", 1);
  emit_cond_negate(c, ctrl.start, x.wires(), one.wires(), overflow.start);
  return c;
}

Circuit build_cswap_reg(FxFormat f) {
  Circuit c;
  const auto ctrl = declare_new(c, "ctrl", 1);
  const auto a = declare_new(c, "a", f.n, f.p);
  const auto b = declare_new(c, "b", f.n, f.p);
  emit_cswap(c, ctrl.start, a.wires(), b.wires());
  return c;
}

long long t_add(int n) { return 2LL * n - 1; }
long long t_cadd(int n) { return 3LL * n + 3; }
long long t_cmp(int n) { return 2LL * n; }

long long t_mul(int n, int p) {
  const long long N = n, P = p;
  return (3 * N * N + 6 * N * P + 3 * N - 6 * P * P + 6 * P) / 2;
}

}  // namespace qfixed
