#include "qfixed/circuit.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qfixed {

std::vector<Wire> Register::wires() const {
  std::vector<Wire> out(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) out[static_cast<std::size_t>(i)] = (*this)[i];
  return out;
}

ResourceCount& ResourceCount::operator+=(const ResourceCount& o) {
  toffoli += o.toffoli;
  cnots += o.cnots;
  nots += o.nots;
  qubits = std::max(qubits, o.qubits);
  return *this;
}

void Circuit::check_wire(Wire w) const {
  if (w >= width_) {
    throw std::out_of_range("wire " + std::to_string(w) + " outside circuit width " + std::to_string(width_));
  }
}

WireSpan Circuit::mcx_controls(const Gate& g) const { return WireSpan(pool_).subspan(g.pool, g.k); }

WireSpan Circuit::mcx_dirty(const Gate& g) const {
  return WireSpan(pool_).subspan(g.pool + g.k, static_cast<std::size_t>(g.k) - 2);
}

void Circuit::x(Wire t) {
  check_wire(t);
  Gate g;
  g.kind = GateKind::Not;
  g.w[0] = t;
  gates_.push_back(g);
}

void Circuit::cx(Wire c, Wire t) {
  check_wire(c);
  check_wire(t);
  if (c == t) throw std::invalid_argument("CNOT control equals target");
  Gate g;
  g.kind = GateKind::Cnot;
  g.w[0] = c;
  g.w[1] = t;
  gates_.push_back(g);
}

void Circuit::ccx(Wire c1, Wire c2, Wire t) {
  check_wire(c1);
  check_wire(c2);
  check_wire(t);
  if (c1 == c2 || c1 == t || c2 == t) throw std::invalid_argument("Toffoli wires must be distinct");
  Gate g;
  g.kind = GateKind::Toffoli;
  g.w[0] = c1;
  g.w[1] = c2;
  g.w[2] = t;
  gates_.push_back(g);
}

void Circuit::mcx(WireSpan controls, Wire target, WireSpan dirty) {
  const std::size_t k = controls.size();
  if (k < 3) throw std::invalid_argument("MCX needs at least 3 controls");
  if (dirty.size() != k - 2) throw std::invalid_argument("MCX needs exactly k-2 dirty wires");
  std::vector<Wire> all(controls.begin(), controls.end());
  all.insert(all.end(), dirty.begin(), dirty.end());
  all.push_back(target);
  for (Wire w : all) check_wire(w);
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::invalid_argument("MCX wires must be distinct");
  }
  Gate g;
  g.kind = GateKind::Mcx;
  g.k = static_cast<std::uint16_t>(k);
  g.w[0] = target;
  g.pool = static_cast<std::uint32_t>(pool_.size());
  pool_.insert(pool_.end(), controls.begin(), controls.end());
  pool_.insert(pool_.end(), dirty.begin(), dirty.end());
  gates_.push_back(g);
}

void Circuit::cswap(Wire c, Wire a, Wire b) {
  check_wire(c);
  check_wire(a);
  check_wire(b);
  if (c == a || c == b || a == b) throw std::invalid_argument("CSWAP wires must be distinct");
  Gate g;
  g.kind = GateKind::Cswap;
  g.w[0] = c;
  g.w[1] = a;
  g.w[2] = b;
  gates_.push_back(g);
}

void Circuit::add_gate(const Gate& g, WireSpan controls, WireSpan dirty) {
  switch (g.kind) {
    case GateKind::Not: x(g.w[0]); break;
    case GateKind::Cnot: cx(g.w[0], g.w[1]); break;
    case GateKind::Toffoli: ccx(g.w[0], g.w[1], g.w[2]); break;
    case GateKind::Mcx: mcx(controls, g.w[0], dirty); break;
    case GateKind::Cswap: cswap(g.w[0], g.w[1], g.w[2]); break;
  }
}

void Circuit::append(const Circuit& other) {
  grow(other.width_);
  const auto offset = static_cast<std::uint32_t>(pool_.size());
  pool_.insert(pool_.end(), other.pool_.begin(), other.pool_.end());
  gates_.reserve(gates_.size() + other.gates_.size());
  for (Gate g : other.gates_) {
    if (g.kind == GateKind::Mcx) g.pool += offset;
    gates_.push_back(g);
  }
}

void Circuit::reverse_tail(std::size_t mark) {
  if (mark > gates_.size()) throw std::out_of_range("reverse_tail mark past end");
  std::reverse(gates_.begin() + static_cast<std::ptrdiff_t>(mark), gates_.end());
}

void Circuit::append_inverse(std::size_t begin, std::size_t end) {
  if (begin > end || end > gates_.size()) throw std::out_of_range("append_inverse range");
  gates_.reserve(gates_.size() + (end - begin));
  for (std::size_t i = end; i > begin; --i) gates_.push_back(gates_[i - 1]);
}

void Circuit::grow(std::size_t width) { width_ = std::max(width_, width); }

Register Circuit::allocate(std::string name, int len, int p) {
  if (len < 0) throw std::invalid_argument("negative register length");
  Register r;
  r.name = std::move(name);
  r.len = len;
  r.p = p;
  if (len == 0) {
    r.start = static_cast<Wire>(width_);
    return r;
  }
  for (auto it = free_.begin(); it != free_.end(); ++it) {
    if (it->second >= len) {
      r.start = it->first;
      it->first += static_cast<Wire>(len);
      it->second -= len;
      if (it->second == 0) free_.erase(it);
      return r;
    }
  }
  // extend a free block that touches the top
  if (!free_.empty() && free_.back().first + static_cast<Wire>(free_.back().second) == width_) {
    r.start = free_.back().first;
    free_.pop_back();
    width_ = r.start + static_cast<std::size_t>(len);
    return r;
  }
  r.start = static_cast<Wire>(width_);
  width_ += static_cast<std::size_t>(len);
  return r;
}

Wire Circuit::allocate_wire(std::string name) { return allocate(std::move(name), 1).start; }

void Circuit::release(const Register& r) {
  if (r.len == 0) return;
  if (r.start + static_cast<std::size_t>(r.len) > width_) throw std::out_of_range("release outside width");
  free_.emplace_back(r.start, r.len);
  std::sort(free_.begin(), free_.end());
  std::vector<std::pair<Wire, int>> merged;
  for (const auto& block : free_) {
    if (!merged.empty() && merged.back().first + static_cast<Wire>(merged.back().second) == block.first) {
      merged.back().second += block.second;
    } else {
      if (!merged.empty() && merged.back().first + static_cast<Wire>(merged.back().second) > block.first) {
        throw std::logic_error("double release of wires");
      }
      merged.push_back(block);
    }
  }
  free_ = std::move(merged);
}

void Circuit::release(Wire w) {
  Register r;
  r.start = w;
  r.len = 1;
  release(r);
}

const Register& Circuit::declare(const Register& r) {
  if (r.start + static_cast<std::size_t>(r.len) > width_) throw std::out_of_range("register outside circuit width");
  for (const auto& other : registers_) {
    if (other.name == r.name) throw std::invalid_argument("duplicate register name '" + r.name + "'");
    const bool disjoint = r.start + static_cast<Wire>(r.len) <= other.start ||
                          other.start + static_cast<Wire>(other.len) <= r.start;
    if (!disjoint) throw std::invalid_argument("register '" + r.name + "' overlaps '" + other.name + "'");
  }
  registers_.push_back(r);
  return registers_.back();
}

const Register& Circuit::reg(std::string_view name) const {
  for (const auto& r : registers_) {
    if (r.name == name) return r;
  }
  throw std::out_of_range("no register named '" + std::string(name) + "'");
}

bool Circuit::has_reg(std::string_view name) const {
  return std::any_of(registers_.begin(), registers_.end(), [&](const Register& r) { return r.name == name; });
}

Circuit inverse(const Circuit& c) {
  Circuit out = c;
  out.reverse_tail(0);
  return out;
}

Circuit compose(const Circuit& a, const Circuit& b) {
  Circuit out = a;
  out.append(b);
  return out;
}

ResourceCount count_resources(const Circuit& c) {
  ResourceCount rc;
  for (const Gate& g : c.gates()) {
    switch (g.kind) {
      case GateKind::Not: ++rc.nots; break;
      case GateKind::Cnot: ++rc.cnots; break;
      case GateKind::Toffoli: ++rc.toffoli; break;
      case GateKind::Mcx: rc.toffoli += 4LL * (g.k - 2); break;
      case GateKind::Cswap:
        ++rc.toffoli;
        rc.cnots += 2;
        break;
    }
  }
  rc.qubits = static_cast<long long>(c.width());
  return rc;
}

Circuit with_uncompute(const Circuit& compute, std::string_view output) {
  Circuit out = compute;
  const Register src = compute.reg(output);
  const std::size_t n_compute = out.size();
  // fresh wires: released scratch may be reused inside the compute segment
  const Register result{"result", static_cast<Wire>(out.width()), src.len, src.p};
  out.grow(out.width() + static_cast<std::size_t>(src.len));
  for (int i = 0; i < src.len; ++i) out.cx(src[i], result[i]);
  out.append_inverse(0, n_compute);
  out.declare(result);
  return out;
}

void write_circuit(std::ostream& os, const Circuit& c) {
  os << "width " << c.width() << '\n';
  for (const auto& r : c.registers()) os << "reg " << r.name << ' ' << r.start << ' ' << r.len << ' ' << r.p << '\n';
  for (const Gate& g : c.gates()) {
    switch (g.kind) {
      case GateKind::Not: os << "NOT " << g.w[0] << '\n'; break;
      case GateKind::Cnot: os << "CNOT " << g.w[0] << ' ' << g.w[1] << '\n'; break;
      case GateKind::Toffoli: os << "TOF " << g.w[0] << ' ' << g.w[1] << ' ' << g.w[2] << '\n'; break;
      case GateKind::Cswap: os << "CSWAP " << g.w[0] << ' ' << g.w[1] << ' ' << g.w[2] << '\n'; break;
      case GateKind::Mcx: {
        os << "MCX " << g.k;
        for (Wire w : c.mcx_controls(g)) os << ' ' << w;
        os << ' ' << g.w[0];
        for (Wire w : c.mcx_dirty(g)) os << ' ' << w;
        os << '\n';
        break;
      }
    }
  }
}

namespace {

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("circuit text line " + std::to_string(line_no) + ": " + what);
}

Wire read_wire(std::istringstream& ls, std::size_t line_no) {
  long long v = -1;
  if (!(ls >> v) || v < 0) parse_error(line_no, "expected wire index");
  return static_cast<Wire>(v);
}

}  // namespace

Circuit read_circuit(std::istream& is) {
  Circuit c;
  std::string line;
  std::size_t line_no = 0;
  bool have_width = false;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op) || op[0] == '#') continue;
    try {
      if (op == "width") {
        long long w = -1;
        if (!(ls >> w) || w < 0) parse_error(line_no, "bad width");
        c.grow(static_cast<std::size_t>(w));
        have_width = true;
        continue;
      }
      if (!have_width) parse_error(line_no, "missing width header");
      if (op == "reg") {
        Register r;
        if (!(ls >> r.name >> r.start >> r.len >> r.p)) parse_error(line_no, "bad register line");
        c.declare(r);
      } else if (op == "NOT") {
        c.x(read_wire(ls, line_no));
      } else if (op == "CNOT") {
        const Wire a = read_wire(ls, line_no);
        c.cx(a, read_wire(ls, line_no));
      } else if (op == "TOF") {
        const Wire a = read_wire(ls, line_no);
        const Wire b = read_wire(ls, line_no);
        c.ccx(a, b, read_wire(ls, line_no));
      } else if (op == "CSWAP") {
        const Wire a = read_wire(ls, line_no);
        const Wire b = read_wire(ls, line_no);
        c.cswap(a, b, read_wire(ls, line_no));
      } else if (op == "MCX") {
        int k = 0;
        if (!(ls >> k) || k < 3) parse_error(line_no, "bad MCX control count");
        std::vector<Wire> controls, dirty;
        for (int i = 0; i < k; ++i) controls.push_back(read_wire(ls, line_no));
        const Wire t = read_wire(ls, line_no);
        for (int i = 0; i < k - 2; ++i) dirty.push_back(read_wire(ls, line_no));
        c.mcx(controls, t, dirty);
      } else {
        parse_error(line_no, "unknown gate '" + op + "'");
      }
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception& e) {
      parse_error(line_no, e.what());
    }
    std::string extra;
    if (ls >> extra) parse_error(line_no, "trailing tokens");
  }
  if (!have_width) throw std::runtime_error("circuit text: missing width header");
  return c;
}

std::string to_text(const Circuit& c) {
  std::ostringstream os;
  write_circuit(os, c);
  return os.str();
}

Circuit from_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  return read_circuit(is);
}

}  // namespace qfixed
