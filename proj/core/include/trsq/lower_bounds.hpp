#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "trsq/bitstring.hpp"
#include "trsq/channel.hpp"
#include "trsq/rational.hpp"

namespace trsq {

// A block string expanded so consecutive ones are at least t apart:
// expanded = b_0 0^{t-1} b_1 0^{t-1} ... b_{m-1} 0^{t-1}.
struct GappyString {
  BitString blocks;
  unsigned t = 1;
  BitString expanded;
};

GappyString build_gappy(const BitString& b, unsigned t);

// whether x has the block form above for this t (requires t | n)
bool is_gappy(const BitString& x, unsigned t);
// largest t >= 2 dividing the length with x t-gappy, 0 when none
unsigned gappy_parameter(const BitString& x);

// Nonzero sign vector u in {-1,0,1}^{k+1}, the coefficients of a polynomial
// meant to be uniformly tiny on a disk around 1.
struct TernaryVector {
  std::vector<int> u;
  unsigned k = 0;

  void validate() const;  // throws std::invalid_argument
};

struct BeBudget {
  unsigned coarse_samples = 64;   // screening resolution on the boundary
  unsigned fine_samples = 1024;   // final objective resolution
  unsigned keep_top = 32;         // survivors of the coarse screen
  unsigned restarts = 8;          // local-search starts beyond the cap
  unsigned max_moves = 400;       // single-coordinate moves per start
  std::uint64_t seed = 1;
};

// Sampled max of |sum_j u_j w^j| over the boundary circle |w - 1| = radius,
// with one refinement pass around the maximizing sample.
double be_objective(const TernaryVector& u, double radius, unsigned samples);

// Searches sign vectors of length kmax+1 for the smallest boundary max:
// exhaustive over all 3^{kmax+1} when kmax <= 12, seeded local search with
// random restarts beyond (one restart is the product-polynomial vector
// prod_i (1 - w^{2^i}), whose boundary max decays like radius^{log2 length}).
TernaryVector be_search(double radius, unsigned kmax,
                        const BeBudget& budget = {});

struct HardPairOverrides {
  unsigned t = 0;           // 0 = largest power-of-two divisor of n, at most 4
  unsigned kcap = 31;       // cap on the sign-vector degree
  double window_mult = 4.0; // m_hat = window_mult * n^{1/5} / (ln n)^{2/5}
  double radius = 0.0;      // 0 = measure max |1 - W(theta)^t| on the window
  BeBudget budget;
};

struct HardPair {
  BitString a, a2;
  GappyString ga, ga2;
  TernaryVector u;
  unsigned t = 0;
  double radius = 0.0;   // disk radius the sign vector was optimized for
  double objective = 0.0;  // its sampled boundary max at that radius
};

// max over |theta| <= 1/(m_hat t) of |1 - (1-rho+rho e^{i theta})^t|
double measure_window_radius(std::uint32_t n, unsigned t,
                             const ChannelParams& ch, double window_mult);

// Builds two t-gappy strings whose block difference is the searched sign
// vector prefixed by n/(2t) zeros: blocks get a 1 in a / 0 in a2 where the
// vector is +1 and the reverse where it is -1.
HardPair construct_hard_pair(std::uint32_t n, const ChannelParams& ch,
                             const HardPairOverrides& overrides = {});

// Exact closeness certificate for a pair of gappy strings. All gaps are
// rationals; the chain inequalities hold with <=, not up to tolerance.
struct PairCertificate {
  BitString a, a2;
  unsigned ell = 0;
  unsigned t = 0;           // common gappy parameter used
  Rational one_bit_gap;     // max_i |p_{a,i} - p_{a2,i}|
  Rational signature_gap;   // max over (i, w) of the table gap
  Rational gap_heavy;       // patterns with at least two ones
  Rational gap_one;         // single-one patterns
  Rational gap_zero;        // the all-zero pattern
  Rational heavy_mass;      // max_{i,alpha} sum of both strings' heavy mass
  Rational weight1_bound;   // one_bit_gap + heavy_mass
  Rational zero_bound;      // (2^ell - 1) * max nonzero-pattern gap
  bool chain_ok = false;    // every inequality below held exactly
};

// Checks, in exact arithmetic: gap_one <= weight1_bound,
// gap_zero <= zero_bound, and signature_gap >= one_bit_gap / 2^{ell-1}.
PairCertificate certify_pair(const BitString& a, const BitString& a2,
                             const ChannelParams& ch, unsigned ell);

// A bounded function of the trace bits at an arbitrary sorted index set.
struct JuntaQuery {
  std::vector<std::uint32_t> positions;  // strictly increasing
  std::vector<double> table;             // size 1 << positions.size()

  void validate(std::size_t n) const;
};

struct MiddleBitResult {
  double gap = 0.0;    // |E_x f - E_x' f|, x' = x with bit n/2 flipped
  double bound = 0.0;  // 2 sum_j Pr[trace position i_j holds source n/2]
};

// The flipped middle bit only shows through a queried position that holds
// source index n/2, so gap <= bound holds exactly. Requires even n.
MiddleBitResult middle_bit_gap(const BitString& x, const ChannelParams& ch,
                               const JuntaQuery& q);

}  // namespace trsq
