#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "trsq/bitstring.hpp"
#include "trsq/channel.hpp"

namespace trsq {

// Parameters for re-expressing window statistics at a higher deletion rate
// delta2 in terms of statistics measured at delta. beta_r is the retention
// ratio (1 - delta2) / (1 - delta): a trace at delta2 is a trace at delta
// passed through a second deletion channel that keeps each bit with
// probability beta_r.
struct DegradeSpec {
  double delta = 0.0;
  double delta2 = 0.0;
  double beta_r = 1.0;
  std::uint32_t ell_in = 1;   // window length of the input statistics
  std::uint32_t ell_out = 1;  // window length requested at delta2
  double tau2 = 1e-6;         // target tolerance for the output entries
  double xi = 0.0;            // selector tail budget, at most tau2 / 2

  // Fills beta_r and picks xi = tau2 / 2 (the largest budget the error
  // split allows).
  static DegradeSpec make(double delta, double delta2, std::uint32_t ell_in,
                          std::uint32_t ell_out, double tau2);
  void validate() const;
};

// Positions of ell consecutive ones, starting from the k-th one (k is a
// 1-based rank), in an infinite Bernoulli string whose bits are one with
// probability p. Gaps between consecutive selected positions are i.i.d.
// geometric; outcomes whose total span exceeds span_bound are not
// enumerated and show up as tail_mass.
struct SelectorDistribution {
  double p = 1.0;
  std::uint32_t k = 1;
  std::uint32_t ell = 1;
  std::uint32_t span_bound = 0;
  // (g_1, ..., g_{ell-1}) with g_j >= 1 and sum <= span_bound, paired with
  // Pr[gaps] = p^{ell-1} (1-p)^{span-(ell-1)}. Empty tuple when ell = 1.
  std::vector<std::pair<std::vector<std::uint32_t>, double>> outcomes;
  double tail_mass = 0.0;

  // Pr[the k-th one sits at 0-indexed position j].
  double start_prob(std::uint32_t j) const;
};

SelectorDistribution selector_pmf(double p, std::uint32_t k, std::uint32_t ell,
                                  std::uint32_t span_bound);

// Upper bound exp(-t m (1 - 1/t)^2 / 2) on Pr[Negbin(m, p) > t m / p],
// where Negbin counts trials needed for m successes. Requires t > 1.
double negbin_tail_bound(std::uint32_t m, double p, double t);

// Exact Pr[Negbin(m, p) > trials] = Pr[Bin(floor(trials), p) <= m - 1].
double negbin_tail_exact(std::uint32_t m, double p, double trials);

// Smallest span s = t (ell_out - 1) / beta_r whose tail mass bound
// exp(-t (ell_out - 1) / 8) is at most xi, with the t >= 2 floor. Rounded
// up to an integer.
std::uint32_t span_bound_for(double beta_r, std::uint32_t ell_out, double xi);

struct DegradeResult {
  std::vector<double> phat;  // 2^{ell_out} entries, pattern bit 0 first
  double tail_mass = 0.0;    // truncated selector mass (formal budget)
  double input_tol = 0.0;    // propagated input tolerance
  double budget() const { return tail_mass + input_tol; }
};

// Window-match probabilities at delta2 for the window starting at trace
// position k (0-indexed), assembled from the delta statistics in sig.
// input_tol is the caller's bound on the entrywise error of sig.
DegradeResult degrade_subword_stats(const SubwordSignature& sig,
                                    const DegradeSpec& spec, std::uint32_t k,
                                    double input_tol = 0.0);

// Total-variation distance between the exact pattern distribution of the
// first ell_out trace bits at delta2 and the selector-composed assembly
// over exact delta statistics. Exact enumeration; n <= 12.
double compose_channels_check(const BitString& x, double delta, double delta2,
                              std::uint32_t ell_out);

}  // namespace trsq
