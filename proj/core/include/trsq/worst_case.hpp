#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "trsq/channel.hpp"
#include "trsq/poly_engine.hpp"
#include "trsq/sq_oracle.hpp"

namespace trsq {

// Knobs for the distinguisher search and the truncated trace-side estimator.
struct WorstCaseParams {
  unsigned ell = 3;        // pattern length
  unsigned d0 = 8;         // slack cutoff for the truncated estimator
  double tau0 = 1e-9;      // per-query tolerance for window queries
  unsigned arc_points = 33;  // grid resolution on the unit arc
  unsigned seg_points = 33;  // grid resolution on each real segment
  double gap_floor = 0.0;    // certificates at or below this gap are flagged

  // ell = round(2 n^{1/5}) capped to [1, min(n, 12)], d0 = full coverage.
  static WorstCaseParams for_length(std::uint32_t n);

  void validate() const;  // throws std::invalid_argument
};

// Outcome of mean-based back-substitution. When a residual exceeds 0.25 the
// solve stops claiming bits and reports the first offending index instead.
struct MeanBasedResult {
  BitString recovered;
  bool failed = false;
  std::uint32_t first_bad = 0;   // index of the first non-binary residual
  double worst_residual = 0.0;   // max |x_hat - rounded| over solved bits
};

// Recovers x from single-bit marginals answered by the oracle, solving the
// upper-triangular system p_i = sum_j C(j,i) rho^{i+1} delta^{j-i} x_j from
// i = n-1 downward, rounding each coordinate as it is recovered.
MeanBasedResult mean_based_reconstruct(SqOracle& oracle, double tau);

// Same solve in exact rational arithmetic from exact marginals, for lengths
// where doubles would drown in the rho^{-n} amplification.
BitString mean_based_invert_rational(const std::vector<Rational>& p,
                                     std::uint32_t n,
                                     const ChannelParams& ch);

// Evaluates the slack-truncated trace-side series at (z, t) through strict
// window queries: every window [j1, j1+slack+ell) is tabulated once over all
// 2^{slack+ell} contents, and each position tuple is assembled by summing the
// completions that agree with w on its offsets.
std::complex<double> estimate_Q_truncated(SqOracle& oracle, unsigned ell,
                                          unsigned widx,
                                          std::complex<double> z, double t,
                                          const WorstCaseParams& params);

// Worst-case amplification of a per-query error tau into the assembled
// estimate: rho^{-ell} sum over tuples of 2^{slack} |zeta1|^{j1} |zeta2|^{slack}.
// Multiply by the per-query tolerance to bound the estimator error.
double estimate_Q_error_multiplier(std::uint32_t n, unsigned ell,
                                   std::complex<double> z, double t,
                                   unsigned d0, const ChannelParams& ch);

// A certified separating evaluation: |P_{x1,w} - P_{x2,w}| >= gap at (z, t).
struct DistinguisherCertificate {
  unsigned ell = 0;
  unsigned widx = 0;
  std::complex<double> z;
  double t = 0.0;
  double gap = 0.0;
  bool flagged = false;  // gap did not clear params.gap_floor
};

// Grid-searches for the evaluation point separating x1 from x2 the most.
// When the length-ell prefixes differ only w = prefix(x1) is scanned;
// otherwise all 2^ell patterns are. One refinement pass zooms the best cell.
DistinguisherCertificate find_distinguisher(const BitString& x1,
                                            const BitString& x2,
                                            const ChannelParams& ch,
                                            const WorstCaseParams& params);

struct PairwiseResult {
  BitString recovered;
  bool ambiguous = false;
  std::uint32_t rounds = 0;       // comparisons performed
  double min_gap = 0.0;           // smallest certified gap among comparisons
  std::uint64_t queries = 0;      // oracle queries issued
};

// Reconstructs the source over all 2^n candidates by tournament elimination:
// certify the two lexicographically smallest survivors, estimate the
// trace-side value at the certified point with a 0.1*gap error budget, and
// drop every candidate farther than 0.5*gap from the estimate. n <= 14.
PairwiseResult pairwise_reconstruct(SqOracle& oracle,
                                    const WorstCaseParams& params);

}  // namespace trsq
