#pragma once

#include <array>

namespace qfixed::testing {

// Optimal pebbling step counts; 0 marks an infeasible cell.
inline constexpr std::array<int, 11> kTable1Cols = {1, 2, 3, 4, 5, 6, 7, 8, 16, 32, 64};
inline constexpr std::array<std::array<long long, 11>, 8> kTable1 = {{
    {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 9, 0, 0, 0, 0, 0, 0, 0},
    {1, 3, 5, 7, 11, 15, 19, 25, 0, 0, 0},
    {1, 3, 5, 7, 9, 13, 17, 21, 71, 0, 0},
    {1, 3, 5, 7, 9, 11, 15, 19, 51, 193, 0},
    {1, 3, 5, 7, 9, 11, 13, 17, 49, 145, 531},
    {1, 3, 5, 7, 9, 11, 13, 15, 47, 117, 369},
}};

}  // namespace qfixed::testing
