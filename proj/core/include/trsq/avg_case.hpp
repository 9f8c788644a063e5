#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trsq/bitstring.hpp"
#include "trsq/channel.hpp"
#include "trsq/sq_oracle.hpp"

namespace trsq {

// Per-term constants of the schedule. The derivations fix only shapes, so
// every constant is a knob; the defaults are calibrated at delta = 1/2 to
// keep k = 2 and ell <= 24 over block lengths up to 4096 while still leaving
// ell - 1 at least the gap span the error budget needs at n = 64.
struct AvgMultipliers {
  double c_k = 0.15;     // k = max(2, ceil(c_k ln(n/eta)))
  double big_c = 2.0;    // C in d = (C/theta)(ln n + k ln(C/theta))
  double c_kap = 0.5;    // kappa = ((1/n)((1-delta)/2)^k)^(c_kap/(1-delta))
  double c_ell_k = 4.0;  // weight of the k term of the locality bound
  double c_ell_n = 0.1;  // weight of the ln n term of the locality bound
};

// Derived schedule for average-case SW estimation at block length n. The
// rate grid S = {delta + i*Delta : 0 <= i <= L} is never materialized: L can
// exceed 1e30 at aggressive multipliers, so it is kept as a double count and
// grid points are evaluated lazily.
struct AvgParams {
  std::uint32_t n = 0;
  double eta = 0.0;    // schedule failure budget
  double delta = 0.0;  // rate of the channel actually queried
  AvgMultipliers mult;

  std::uint32_t k = 0;    // pattern length
  double theta = 0.0;     // (1-delta)^2 / 2
  double kappa = 0.0;     // SW accuracy target
  double tau2 = 0.0;      // E[#]-accuracy target, kappa ((1-delta)/2)^k
  std::uint32_t d = 0;    // degree budget of the interpolation step
  double Delta = 0.0;     // grid pitch
  double L = 0.0;         // grid step count
  std::uint32_t ell = 0;  // locality bound for oracle queries

  double delta_at(double i) const { return delta + i * Delta; }
  double grid_top() const { return delta_at(L); }

  void validate() const;
};

AvgParams avg_params(std::uint32_t n, double eta, const ChannelParams& ch,
                     const AvgMultipliers& mult = {});

// E[#(w, y)] with windows placed at every trace position in [0, n), padded
// convention; equals the column sum of the signature at the pattern.
double expected_kmer_count(const SubwordSignature& sig2, std::uint32_t widx);

// One SW-value estimate together with the error bound the assembly actually
// incurred (query tolerance + uncovered selector mass, amplified by the
// (1-delta2)^-k division).
struct SwEstimate {
  double value = 0.0;
  double budget = 0.0;
  bool flagged = false;    // budget > kappa
  std::uint32_t span = 0;  // gap-span cutoff of the selector walk
  double query_tau = 0.0;  // per-query tolerance requested
};

// Estimates SW_{x,w}(delta2) from delta-statistics answered by the oracle,
// walking the thinning selector and reading sparse window marginals.
SwEstimate estimate_SW(SqOracle& oracle, const AvgParams& pr,
                       std::uint32_t widx, double delta2);

// Estimates over all patterns x requested grid rates, cells in parallel.
struct SwTable {
  std::uint32_t k = 0;
  std::vector<double> deltas;
  std::vector<SwEstimate> cells;  // cells[widx * deltas.size() + di]

  const SwEstimate& at(std::uint32_t widx, std::size_t di) const;
  bool any_flagged() const;
};

SwTable sw_table(SqOracle& oracle, const AvgParams& pr,
                 const std::vector<double>& deltas);

enum class AvgBackend { kExactMean, kSwGreedy };

const char* to_string(AvgBackend b);

struct AvgResult {
  BitString x;
  bool failed = false;
  double residual = 0.0;  // backend-specific consistency score
  std::string note;       // short reason when failed
};

// Pluggable reconstruction. kExactMean delegates to the certified mean-based
// solve over single-bit marginals; kSwGreedy extends a prefix bit by bit,
// scoring each extension by the best least-squares fit between the SW tables
// of its enumerated completions and the estimated table (hence n <= 16).
// Greedy success is empirical: the flag only fires when the final fit is
// inconsistent with both error budgets.
AvgResult avg_reconstruct(SqOracle& oracle, const AvgParams& pr,
                          AvgBackend backend);

}  // namespace trsq
