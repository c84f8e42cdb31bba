#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "qfixed/circuit.hpp"
#include "qfixed/fixed_point.hpp"

namespace qfixed {

/// One classical bit per wire, packed 64 to a word.
class BasisState {
 public:
  BasisState() = default;
  explicit BasisState(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

  std::size_t width() const { return width_; }
  bool get(Wire w) const { return (words_[w >> 6] >> (w & 63)) & 1U; }
  void set(Wire w, bool v) {
    const std::uint64_t bit = std::uint64_t{1} << (w & 63);
    words_[w >> 6] = v ? (words_[w >> 6] | bit) : (words_[w >> 6] & ~bit);
  }
  void flip(Wire w) { words_[w >> 6] ^= std::uint64_t{1} << (w & 63); }

  static BasisState random(std::size_t width, std::mt19937_64& rng);

  friend bool operator==(const BasisState&, const BasisState&) = default;

 private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

void run_inplace(const Circuit& c, BasisState& s);
BasisState run(const Circuit& c, BasisState s);

std::uint64_t read_bits(const BasisState& s, const Register& r);
void write_bits(BasisState& s, const Register& r, std::uint64_t bits);
FxWord read_register(const BasisState& s, const Register& r);
void write_register(BasisState& s, const Register& r, const FxWord& w);

/// 64 independent basis states evaluated together: one 64-bit lane word per wire.
class BatchState {
 public:
  BatchState() = default;
  explicit BatchState(std::size_t width) : lanes_(width, 0) {}

  std::size_t width() const { return lanes_.size(); }
  std::uint64_t& lane_word(Wire w) { return lanes_[w]; }
  std::uint64_t lane_word(Wire w) const { return lanes_[w]; }

  std::uint64_t read(const Register& r, int lane) const;
  void write(const Register& r, int lane, std::uint64_t bits);
  void write_wire(Wire w, int lane, bool v);
  bool read_wire(Wire w, int lane) const { return (lanes_[w] >> lane) & 1U; }

  friend bool operator==(const BatchState&, const BatchState&) = default;

 private:
  std::vector<std::uint64_t> lanes_;
};

void run_inplace(const Circuit& c, BatchState& s);

/// Worker count for parallel evaluation: QFIXED_THREADS if set, otherwise the
/// hardware concurrency.
unsigned worker_count();

/// Run `c` on every input word (written to `in`, all other wires 0) and
/// return the word left in `out`. Inputs are processed 64 at a time on a
/// worker pool; results keep input order.
std::vector<std::uint64_t> evaluate_words(const Circuit& c, const Register& in, const Register& out,
                                          const std::vector<std::uint64_t>& inputs);

/// Same, but also reports whether every wire outside `keep` returned to 0.
struct HygieneReport {
  std::vector<std::uint64_t> outputs;
  bool clean = true;
  std::size_t dirty_wire_count = 0;
};
HygieneReport evaluate_words_checked(const Circuit& c, const Register& in, const Register& out,
                                     const std::vector<std::uint64_t>& inputs, const std::vector<Register>& keep);

}  // namespace qfixed
