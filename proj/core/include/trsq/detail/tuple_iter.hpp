#pragma once

// Enumeration of increasing index tuples 0 <= i_1 < ... < i_ell < n with
// bounded slack i_ell - i_1 - (ell - 1). Shared by the polynomial evaluators
// and the window-query estimator, which must walk the same tuple set.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace trsq::detail {

inline void for_each_tuple(
    std::size_t n, unsigned ell, std::size_t dmax,
    const std::function<void(const std::vector<std::uint32_t>&, std::size_t)>&
        sink) {
  std::vector<std::uint32_t> idx(ell);
  std::function<void(unsigned, std::size_t)> rec = [&](unsigned k,
                                                       std::size_t next) {
    if (k == ell) {
      sink(idx, idx[ell - 1] - idx[0] - (ell - 1));
      return;
    }
    const std::size_t hi =
        k == 0 ? n : std::min<std::size_t>(n, idx[0] + (k + dmax) + 1);
    for (std::size_t j = next; j < hi; ++j) {
      // remaining ell-1-k indices still need room above j
      if (j + (ell - 1 - k) >= n) break;
      if (k > 0 && j - idx[0] - k > dmax) break;
      idx[k] = std::uint32_t(j);
      rec(k + 1, j + 1);
    }
  };
  rec(0, 0);
}

}  // namespace trsq::detail
