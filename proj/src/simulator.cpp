#include "qfixed/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace qfixed {

BasisState BasisState::random(std::size_t width, std::mt19937_64& rng) {
  BasisState s(width);
  for (auto& w : s.words_) w = rng();
  if (width % 64 != 0 && !s.words_.empty()) s.words_.back() &= (std::uint64_t{1} << (width % 64)) - 1;
  return s;
}

void run_inplace(const Circuit& c, BasisState& s) {
  if (s.width() != c.width()) {
    throw std::invalid_argument("state width " + std::to_string(s.width()) + " does not match circuit width " +
                                std::to_string(c.width()));
  }
  for (const Gate& g : c.gates()) {
    switch (g.kind) {
      case GateKind::Not: s.flip(g.w[0]); break;
      case GateKind::Cnot:
        if (s.get(g.w[0])) s.flip(g.w[1]);
        break;
      case GateKind::Toffoli:
        if (s.get(g.w[0]) && s.get(g.w[1])) s.flip(g.w[2]);
        break;
      case GateKind::Mcx: {
        const auto controls = c.mcx_controls(g);
        if (std::all_of(controls.begin(), controls.end(), [&](Wire w) { return s.get(w); })) s.flip(g.w[0]);
        break;
      }
      case GateKind::Cswap:
        if (s.get(g.w[0])) {
          const bool a = s.get(g.w[1]);
          s.set(g.w[1], s.get(g.w[2]));
          s.set(g.w[2], a);
        }
        break;
    }
  }
}

BasisState run(const Circuit& c, BasisState s) {
  run_inplace(c, s);
  return s;
}

std::uint64_t read_bits(const BasisState& s, const Register& r) {
  if (r.len > 64) throw std::invalid_argument("register wider than 64 bits");
  std::uint64_t v = 0;
  for (int i = 0; i < r.len; ++i) v |= static_cast<std::uint64_t>(s.get(r[i])) << i;
  return v;
}

void write_bits(BasisState& s, const Register& r, std::uint64_t bits) {
  if (r.len > 64) throw std::invalid_argument("register wider than 64 bits");
  for (int i = 0; i < r.len; ++i) s.set(r[i], (bits >> i) & 1U);
}

FxWord read_register(const BasisState& s, const Register& r) { return FxWord(r.format(), read_bits(s, r)); }

void write_register(BasisState& s, const Register& r, const FxWord& w) {
  if (w.format().n != r.len) throw std::invalid_argument("word width does not match register '" + r.name + "'");
  write_bits(s, r, w.bits());
}

std::uint64_t BatchState::read(const Register& r, int lane) const {
  std::uint64_t v = 0;
  for (int i = 0; i < r.len; ++i) v |= ((lanes_[r[i]] >> lane) & 1U) << i;
  return v;
}

void BatchState::write(const Register& r, int lane, std::uint64_t bits) {
  for (int i = 0; i < r.len; ++i) write_wire(r[i], lane, (bits >> i) & 1U);
}

void BatchState::write_wire(Wire w, int lane, bool v) {
  const std::uint64_t bit = std::uint64_t{1} << lane;
  lanes_[w] = v ? (lanes_[w] | bit) : (lanes_[w] & ~bit);
}

void run_inplace(const Circuit& c, BatchState& s) {
  if (s.width() != c.width()) throw std::invalid_argument("batch width does not match circuit width");
  for (const Gate& g : c.gates()) {
    switch (g.kind) {
      case GateKind::Not: s.lane_word(g.w[0]) = ~s.lane_word(g.w[0]); break;
      case GateKind::Cnot: s.lane_word(g.w[1]) ^= s.lane_word(g.w[0]); break;
      case GateKind::Toffoli: s.lane_word(g.w[2]) ^= s.lane_word(g.w[0]) & s.lane_word(g.w[1]); break;
      case GateKind::Mcx: {
        std::uint64_t m = ~std::uint64_t{0};
        for (Wire w : c.mcx_controls(g)) m &= s.lane_word(w);
        s.lane_word(g.w[0]) ^= m;
        break;
      }
      case GateKind::Cswap: {
        const std::uint64_t m = s.lane_word(g.w[0]);
        const std::uint64_t d = (s.lane_word(g.w[1]) ^ s.lane_word(g.w[2])) & m;
        s.lane_word(g.w[1]) ^= d;
        s.lane_word(g.w[2]) ^= d;
        break;
      }
    }
  }
}

unsigned worker_count() {
  unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QFIXED_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return hw;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

HygieneReport evaluate_words_checked(const Circuit& c, const Register& in, const Register& out,
                                     const std::vector<std::uint64_t>& inputs, const std::vector<Register>& keep) {
  HygieneReport report;
  report.outputs.assign(inputs.size(), 0);
  std::vector<char> kept(c.width(), 0);
  for (const auto& r : keep) {
    for (int i = 0; i < r.len; ++i) kept[r[i]] = 1;
  }
  const std::size_t batches = (inputs.size() + 63) / 64;
  std::vector<std::size_t> dirty(batches, 0);
  parallel_for(batches, [&](std::size_t b) {
    BatchState s(c.width());
    const std::size_t base = b * 64;
    const int lanes = static_cast<int>(std::min<std::size_t>(64, inputs.size() - base));
    for (int l = 0; l < lanes; ++l) s.write(in, l, inputs[base + static_cast<std::size_t>(l)]);
    run_inplace(c, s);
    for (int l = 0; l < lanes; ++l) report.outputs[base + static_cast<std::size_t>(l)] = s.read(out, l);
    const std::uint64_t live = lanes == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << lanes) - 1);
    for (Wire w = 0; w < c.width(); ++w) {
      if (!kept[w] && (s.lane_word(w) & live) != 0) ++dirty[b];
    }
  });
  for (std::size_t d : dirty) report.dirty_wire_count += d;
  report.clean = report.dirty_wire_count == 0;
  return report;
}

std::vector<std::uint64_t> evaluate_words(const Circuit& c, const Register& in, const Register& out,
                                          const std::vector<std::uint64_t>& inputs) {
  return evaluate_words_checked(c, in, out, inputs, {in, out}).outputs;
}

}  // namespace qfixed
