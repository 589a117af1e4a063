#pragma once

#include <array>
#include <cstddef>

#include "hypernca/kernels.hpp"

namespace hypernca::kernels::detail {

/// In-bounds taps of one cell: tap index into the 27-tap kernel and the
/// neighbour's cell index. Out-of-range taps are skipped (zero padding).
struct Neighborhood {
  std::array<int, 27> tap{};
  std::array<std::size_t, 27> cell{};
  int count = 0;
};

inline Neighborhood neighborhood(Grid g, int l, int i, int j) {
  Neighborhood n;
  int t = 0;
  for (int dl = -1; dl <= 1; ++dl) {
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj, ++t) {
        const int nl = l + dl, ni = i + di, nj = j + dj;
        if (nl < 0 || nl >= g.layers || ni < 0 || ni >= g.width || nj < 0 || nj >= g.width) {
          continue;
        }
        n.tap[n.count] = t;
        n.cell[n.count] = (static_cast<std::size_t>(nl) * g.width + ni) * g.width + nj;
        ++n.count;
      }
    }
  }
  return n;
}

}  // namespace hypernca::kernels::detail
