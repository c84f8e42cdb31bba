#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>

#include "qfixed/circuit.hpp"
#include "qfixed/simulator.hpp"

namespace qfixed::testing {

/// Runs `count` cases through `c`, 64 lanes per batch. `setup(state, lane, i)`
/// writes the inputs of case i, `check(state, lane, i)` returns an empty string
/// on success or a failure description. Returns the first failure, if any.
template <class Setup, class Check>
std::string for_each_case(const Circuit& c, std::size_t count, Setup&& setup, Check&& check) {
  for (std::size_t base = 0; base < count; base += 64) {
    BatchState s(c.width());
    const int lanes = static_cast<int>(std::min<std::size_t>(64, count - base));
    for (int l = 0; l < lanes; ++l) setup(s, l, base + static_cast<std::size_t>(l));
    run_inplace(c, s);
    for (int l = 0; l < lanes; ++l) {
      std::string msg = check(s, l, base + static_cast<std::size_t>(l));
      if (!msg.empty()) return "case " + std::to_string(base + static_cast<std::size_t>(l)) + ": " + msg;
    }
  }
  return {};
}

inline std::uint64_t low_mask(int n) { return n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1); }

template <class... Args>
std::string describe(const Args&... args) {
  std::ostringstream os;
  ((os << args << ' '), ...);
  return os.str();
}

}  // namespace qfixed::testing
