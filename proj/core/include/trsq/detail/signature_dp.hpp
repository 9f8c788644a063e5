#pragma once

// Shared kernels for window-match statistics of the deletion channel.
//
// Everything is phrased over a generic scalar so the same recurrences run in
// double (fast paths) and in exact rationals (certification paths). Source
// bits enter only through Pr[x_s = 1], which also gives the averaged-source
// variant (unknown bits at probability 1/2) used by the greedy backend.
//
// Conventions, used consistently below:
//   * trace position i holds source index j with probability
//     T_i(j) = C(j, i) rho^{i+1} delta^{j-i}      (j >= i),
//     where the leftover mass 1 - sum_j T_i(j) is the event that position i
//     already lies in the all-zero padding;
//   * given the previous retained source index j, the next retained index is
//     j' > j with probability rho delta^{j'-j-1}, and the event "no further
//     real position is retained" has the closed-form mass delta^{n-1-j}.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "trsq/parallel.hpp"

namespace trsq::detail {

template <class Real>
struct SourceProbs {
  std::vector<Real> p1;  // p1[s] = Pr[x_s = 1]

  std::size_t size() const { return p1.size(); }
  Real match(std::size_t s, int bit) const {
    return bit ? p1[s] : Real(1) - p1[s];
  }
};

// pmf of the source index observed at trace position i, over j in [0, n).
// Row minima sit at both ends (log-concave), so the double path only needs a
// fallback when rho^{i+1} or delta^{n} leaves the normal range.
template <class Real>
std::vector<Real> retained_position_pmf(std::size_t i, std::size_t n,
                                        const Real& rho, const Real& delta) {
  std::vector<Real> t(n, Real(0));
  if (i >= n) return t;

  if constexpr (std::is_same_v<Real, double>) {
    const double head = std::pow(rho, double(i + 1));
    const double tail_floor = std::pow(delta, double(n));
    constexpr double kNormalMin = 2.3e-308;
    if (head < kNormalMin || (delta > 0 && tail_floor < kNormalMin && i + 1 < n)) {
      // Log-space row; accuracy ~n*eps in the exponent, plenty for the
      // tolerances asserted on these sizes.
      const double lr = std::log(rho), ld = std::log(delta);
      for (std::size_t j = i; j < n; ++j) {
        const double lg = std::lgamma(double(j + 1)) -
                          std::lgamma(double(i + 1)) -
                          std::lgamma(double(j - i + 1));
        const double v = std::exp(lg + double(i + 1) * lr + double(j - i) * ld);
        if (!std::isfinite(v))
          throw std::runtime_error("retained_position_pmf: non-finite term");
        t[j] = v;
      }
      return t;
    }
  }

  Real cur = 1;
  for (std::size_t k = 0; k <= i; ++k) cur *= rho;
  t[i] = cur;
  for (std::size_t j = i + 1; j < n; ++j) {
    cur = cur * delta * Real(long(j)) / Real(long(j - i));
    if constexpr (std::is_same_v<Real, double>) {
      if (!std::isfinite(cur))
        throw std::runtime_error("retained_position_pmf: non-finite term");
    }
    t[j] = cur;
  }
  return t;
}

// p[i] = Pr[y_i = 1] for i in [0, n).
template <class Real>
std::vector<Real> one_bit_dp(const SourceProbs<Real>& src, const Real& rho,
                             const Real& delta) {
  const std::size_t n = src.size();
  std::vector<Real> p(n, Real(0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = retained_position_pmf(i, n, rho, delta);
    Real acc = 0;
    for (std::size_t j = i; j < n; ++j) acc += t[j] * src.p1[j];
    p[i] = acc;
  }
  return p;
}

// Full window-match table, row-major n x 2^ell:
// out[i * 2^ell + widx] = Pr[(y_i, ..., y_{i+ell-1}) = w].
//
// Per pattern, G_w(j) = Pr[window matches | trace window starts at source j],
// built backwards one window offset at a time; the geometric "no further
// retained position" mass closes each layer with the forced-zero suffix.
template <class Real>
std::vector<Real> signature_dp(const SourceProbs<Real>& src, const Real& rho,
                               const Real& delta, unsigned ell) {
  const std::size_t n = src.size();
  if (n == 0) throw std::invalid_argument("signature_dp: empty source");
  if (ell < 1 || ell > n)
    throw std::invalid_argument("signature_dp: need 1 <= ell <= n");
  if (ell > 26) throw std::invalid_argument("signature_dp: 2^ell too large");
  const std::size_t P = std::size_t(1) << ell;

  // G0[widx * n + j]: match probability from the first window offset.
  std::vector<Real> g0(P * n);
  parallel_for_chunks(0, P, [&](std::size_t wlo, std::size_t whi) {
    std::vector<Real> cur(n), s(n);
    for (std::size_t widx = wlo; widx < whi; ++widx) {
      const int last_bit = int((widx >> (ell - 1)) & 1u);
      for (std::size_t j = 0; j < n; ++j) cur[j] = src.match(j, last_bit);
      for (int k = int(ell) - 2; k >= 0; --k) {
        // suffix w_{k+1}..w_{ell-1} all zero <=> widx >> (k+1) == 0
        const bool zero_suffix = (widx >> (k + 1)) == 0;
        s[n - 1] = zero_suffix ? Real(1) : Real(0);
        for (std::size_t j = n - 1; j-- > 0;)
          s[j] = rho * cur[j + 1] + delta * s[j + 1];
        const int bit = int((widx >> k) & 1u);
        for (std::size_t j = 0; j < n; ++j) cur[j] = src.match(j, bit) * s[j];
      }
      for (std::size_t j = 0; j < n; ++j) g0[widx * n + j] = cur[j];
    }
  });

  std::vector<Real> out(n * P, Real(0));
  parallel_for_chunks(0, n, [&](std::size_t ilo, std::size_t ihi) {
    for (std::size_t i = ilo; i < ihi; ++i) {
      const auto t = retained_position_pmf(i, n, rho, delta);
      Real mass = 0;
      for (std::size_t j = i; j < n; ++j) mass += t[j];
      Real in_padding = Real(1) - mass;
      if (in_padding < Real(0)) in_padding = 0;  // double round-off only
      Real* row = out.data() + i * P;
      for (std::size_t widx = 0; widx < P; ++widx) {
        const Real* g = g0.data() + widx * n;
        Real acc = 0;
        for (std::size_t j = i; j < n; ++j) acc += t[j] * g[j];
        row[widx] = acc;
      }
      row[0] += in_padding;  // whole window inside the zero padding
    }
  });
  return out;
}

}  // namespace trsq::detail
