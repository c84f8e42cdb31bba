#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qfixed/fixed_point.hpp"

namespace qfixed {

using Wire = std::uint32_t;
using WireSpan = std::span<const Wire>;

enum class GateKind : std::uint8_t { Not, Cnot, Toffoli, Mcx, Cswap };

/// One reversible gate. Operand layout by kind:
///   Not:     w[0] target
///   Cnot:    w[0] control, w[1] target
///   Toffoli: w[0], w[1] controls, w[2] target
///   Mcx:     w[0] target; controls and dirty wires live in the circuit pool
///   Cswap:   w[0] control, w[1] and w[2] swapped
struct Gate {
  GateKind kind = GateKind::Not;
  std::uint16_t k = 0;
  Wire w[3] = {0, 0, 0};
  std::uint32_t pool = 0;
};

/// Named contiguous wire range with an attached point position.
struct Register {
  std::string name;
  Wire start = 0;
  int len = 0;
  int p = 0;

  Wire operator[](int i) const { return start + static_cast<Wire>(i); }
  std::vector<Wire> wires() const;
  FxFormat format() const { return FxFormat(len, p); }
};

struct ResourceCount {
  long long toffoli = 0;
  long long cnots = 0;
  long long nots = 0;
  long long qubits = 0;

  ResourceCount& operator+=(const ResourceCount& o);
  friend bool operator==(const ResourceCount&, const ResourceCount&) = default;
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::size_t width) : width_(width) {}

  std::size_t width() const { return width_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }
  const std::vector<Gate>& gates() const { return gates_; }

  WireSpan mcx_controls(const Gate& g) const;
  WireSpan mcx_dirty(const Gate& g) const;

  void x(Wire t);
  void cx(Wire c, Wire t);
  void ccx(Wire c1, Wire c2, Wire t);
  /// k-controlled NOT with k >= 3 and exactly k - 2 dirty wires.
  void mcx(WireSpan controls, Wire target, WireSpan dirty);
  void cswap(Wire c, Wire a, Wire b);
  void add_gate(const Gate& g, WireSpan controls = {}, WireSpan dirty = {});

  /// Append another circuit acting on the same wire numbering.
  void append(const Circuit& other);
  /// Reverse gates [mark, size()), turning that segment into its inverse.
  void reverse_tail(std::size_t mark);
  /// Append the inverse of gates [begin, end).
  void append_inverse(std::size_t begin, std::size_t end);

  Register allocate(std::string name, int len, int p = 0);
  Wire allocate_wire(std::string name = "anc");
  /// Return wires to the free list; they must be clean when released.
  void release(const Register& r);
  void release(Wire w);
  void grow(std::size_t width);

  /// Expose a register in the circuit's register map (ranges stay disjoint).
  const Register& declare(const Register& r);
  const std::vector<Register>& registers() const { return registers_; }
  const Register& reg(std::string_view name) const;
  bool has_reg(std::string_view name) const;

 private:
  void check_wire(Wire w) const;

  std::size_t width_ = 0;
  std::vector<Gate> gates_;
  std::vector<Wire> pool_;
  std::vector<Register> registers_;
  std::vector<std::pair<Wire, int>> free_;
};

Circuit inverse(const Circuit& c);
Circuit compose(const Circuit& a, const Circuit& b);
ResourceCount count_resources(const Circuit& c);

/// Compute, copy `output` into a fresh register named "result", uncompute.
Circuit with_uncompute(const Circuit& compute, std::string_view output);

void write_circuit(std::ostream& os, const Circuit& c);
Circuit read_circuit(std::istream& is);
std::string to_text(const Circuit& c);
Circuit from_text(std::string_view text);

}  // namespace qfixed
