#pragma once

// Deletion channel model and its exact window statistics.
//
// A source string x in {0,1}^n passes through the channel; each bit is
// deleted independently with probability delta and survivors concatenate
// into the trace y. Traces are read with an infinite zero suffix, so window
// statistics are defined at every start position in [0, n).

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "trsq/bitstring.hpp"
#include "trsq/rational.hpp"
#include "trsq/rng.hpp"

namespace trsq {

class ChannelParams {
 public:
  // delta must lie strictly inside (0, 1).
  static ChannelParams of(double delta) {
    return ChannelParams(delta, rational_from_double(delta));
  }

  // Exact decimal form, e.g. "0.3" -> 3/10. Keeps rational certification
  // denominators small; the double mirror is the nearest double.
  static ChannelParams from_decimal(std::string_view dec) {
    Rational d = rational_from_decimal(dec);
    return ChannelParams(to_double(d), d);
  }

  double delta() const noexcept { return delta_; }
  double rho() const noexcept { return 1.0 - delta_; }
  const Rational& delta_exact() const noexcept { return delta_exact_; }
  Rational rho_exact() const { return Rational(1) - delta_exact_; }

 private:
  ChannelParams(double d, Rational d_exact)
      : delta_(d), delta_exact_(std::move(d_exact)) {
    if (!(delta_ > 0.0 && delta_ < 1.0) || !(delta_exact_ > 0) ||
        !(delta_exact_ < 1))
      throw std::invalid_argument("ChannelParams: delta must be in (0,1)");
  }

  double delta_;
  Rational delta_exact_;
};

struct Trace {
  BitString bits;                      // survivors, in source order
  std::vector<std::uint32_t> origin;   // origin[i] = source index of bits[i]
};

Trace sample_trace(const BitString& x, const ChannelParams& ch, Rng& rng);

struct OneBitStats {
  std::vector<double> p;  // p[i] = Pr[y_i = 1]
};

OneBitStats exact_one_bit_stats(const BitString& x, const ChannelParams& ch);
std::vector<Rational> exact_one_bit_stats_rational(const BitString& x,
                                                   const ChannelParams& ch);

// Window-match table: at(i, widx) = Pr[(y_i, ..., y_{i+ell-1}) = w].
// Rows are probability vectors over the 2^ell patterns.
struct SubwordSignature {
  std::uint32_t n = 0;
  std::uint32_t ell = 0;
  double delta = 0.0;
  std::vector<double> p;  // row-major, n x 2^ell

  std::size_t patterns() const noexcept { return std::size_t(1) << ell; }
  double at(std::size_t i, std::size_t widx) const {
    return p.at(i * patterns() + widx);
  }
};

struct RationalSignature {
  std::uint32_t n = 0;
  std::uint32_t ell = 0;
  Rational delta;
  std::vector<Rational> p;

  std::size_t patterns() const noexcept { return std::size_t(1) << ell; }
  const Rational& at(std::size_t i, std::size_t widx) const {
    return p.at(i * patterns() + widx);
  }
};

// Exact dynamic program, O(n^2 * 2^ell + n * ell * 2^ell). Requires
// 1 <= ell <= n.
SubwordSignature exact_subword_signature(const BitString& x,
                                         const ChannelParams& ch, unsigned ell);
RationalSignature exact_subword_signature_rational(const BitString& x,
                                                   const ChannelParams& ch,
                                                   unsigned ell);

// Same table for an averaged source: p1[s] = Pr[x_s = 1], bits independent.
// Coincides with exact_subword_signature when every p1 is 0 or 1.
SubwordSignature exact_subword_signature_prob(const std::vector<double>& p1,
                                              const ChannelParams& ch,
                                              unsigned ell);

// Independent oracle: full enumeration of the 2^n retention subsets.
// Refuses n > 24 (budget guard).
SubwordSignature brute_force_signature(const BitString& x,
                                       const ChannelParams& ch, unsigned ell);

struct MonteCarloSignature {
  SubwordSignature freq;
  std::vector<double> stderr_;  // same layout as freq.p
  std::uint64_t samples = 0;
};

// Empirical window frequencies from `samples` sampled traces. The rng is
// taken by value: the caller's stream is not advanced.
MonteCarloSignature monte_carlo_signature(const BitString& x,
                                          const ChannelParams& ch, unsigned ell,
                                          std::uint64_t samples, Rng rng);

// How a trace position past the last real bit is read. kZeroPadded treats the
// trace as extended by an infinite zero suffix (the convention of the subword
// signature). kStrictLength demands the trace actually reach past the last
// queried position, so a pattern can only be matched by real bits; this is the
// convention under which the source/trace polynomial identity is exact.
enum class TraceTail { kZeroPadded, kStrictLength };

// Joint match probability at arbitrary strictly increasing trace positions:
// Pr[ y_{positions[k]} = w_k for all k ], pattern encoded as usual (bit k of
// widx belongs to positions[k]). Positions may reach into the padding.
double joint_trace_match(const BitString& x, const ChannelParams& ch,
                         const std::vector<std::uint32_t>& positions,
                         unsigned widx,
                         TraceTail tail = TraceTail::kZeroPadded);

// Pr[trace position i holds source index j] for j in [0, n); the missing
// mass is the probability that position i lies in the zero padding.
std::vector<double> retained_position_pmf(std::size_t i, std::size_t n,
                                          const ChannelParams& ch);
std::vector<Rational> retained_position_pmf_rational(std::size_t i,
                                                     std::size_t n,
                                                     const ChannelParams& ch);

}  // namespace trsq
