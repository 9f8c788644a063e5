#include "trsq/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "trsq/parallel.hpp"

namespace trsq {

namespace {

// C(top, pick) in doubles via the multiplicative form; exact for the desk
// sizes this module sees.
double binom(std::uint32_t top, std::uint32_t pick) {
  if (pick > top) return 0.0;
  pick = std::min(pick, top - pick);
  double r = 1.0;
  for (std::uint32_t i = 1; i <= pick; ++i)
    r = r * double(top - pick + i) / double(i);
  return r;
}

}  // namespace

DegradeSpec DegradeSpec::make(double delta, double delta2, std::uint32_t ell_in,
                              std::uint32_t ell_out, double tau2) {
  DegradeSpec s;
  s.delta = delta;
  s.delta2 = delta2;
  s.beta_r = (1.0 - delta2) / (1.0 - delta);
  s.ell_in = ell_in;
  s.ell_out = ell_out;
  s.tau2 = tau2;
  s.xi = tau2 / 2.0;
  s.validate();
  return s;
}

void DegradeSpec::validate() const {
  if (!(delta >= 0.0) || !(delta2 < 1.0) || !(delta <= delta2))
    throw std::invalid_argument("degrade runs toward higher deletion only");
  if (!(beta_r > 0.0) || !(beta_r <= 1.0))
    throw std::invalid_argument("beta_r out of range");
  const double expect = (1.0 - delta2) / (1.0 - delta);
  if (std::abs(beta_r - expect) > 1e-12)
    throw std::invalid_argument("beta_r inconsistent with the deletion rates");
  if (ell_in < 1 || ell_in > 30 || ell_out < 1 || ell_out > 20)
    throw std::invalid_argument("window length out of range");
  if (!(tau2 > 0.0) || !(tau2 <= 1.0))
    throw std::invalid_argument("tau2 out of range");
  if (!(xi >= 0.0) || xi > tau2 / 2.0 + 1e-15)
    throw std::invalid_argument("selector tail budget exceeds tau2 / 2");
}

double SelectorDistribution::start_prob(std::uint32_t j) const {
  // k-th one at position j: k - 1 ones among the first j bits, one at j.
  if (j + 1 < k) return 0.0;
  return binom(j, k - 1) * std::pow(p, double(k)) *
         std::pow(1.0 - p, double(j - (k - 1)));
}

SelectorDistribution selector_pmf(double p, std::uint32_t k, std::uint32_t ell,
                                  std::uint32_t span_bound) {
  if (!(p > 0.0) || !(p <= 1.0))
    throw std::invalid_argument("selector probability out of range");
  if (k < 1 || ell < 1) throw std::invalid_argument("need k >= 1 and ell >= 1");
  SelectorDistribution d;
  d.p = p;
  d.k = k;
  d.ell = ell;
  d.span_bound = span_bound;

  double covered = 0.0;
  std::vector<std::uint32_t> gaps;
  const double q = 1.0 - p;
  // Enumerate gap tuples by total span; mass p^{ell-1} q^{span-(ell-1)}.
  auto walk = [&](auto&& self, std::uint32_t span_left, double mass) -> void {
    if (gaps.size() + 1 == ell) {
      d.outcomes.emplace_back(gaps, mass);
      covered += mass;
      return;
    }
    for (std::uint32_t g = 1; g + (ell - 2 - gaps.size()) <= span_left; ++g) {
      const double m = mass * p * std::pow(q, double(g - 1));
      if (m == 0.0) break;  // q == 0 kills every g >= 2
      gaps.push_back(g);
      self(self, span_left - g, m);
      gaps.pop_back();
    }
  };
  walk(walk, span_bound, 1.0);
  d.tail_mass = std::max(0.0, 1.0 - covered);
  return d;
}

double negbin_tail_bound(std::uint32_t m, double p, double t) {
  if (!(p > 0.0) || !(p <= 1.0))
    throw std::invalid_argument("success probability out of range");
  if (!(t > 1.0)) throw std::invalid_argument("tail bound needs t > 1");
  const double u = 1.0 - 1.0 / t;
  return std::exp(-t * double(m) * u * u / 2.0);
}

double negbin_tail_exact(std::uint32_t m, double p, double trials) {
  if (!(p > 0.0) || !(p <= 1.0))
    throw std::invalid_argument("success probability out of range");
  if (m == 0) return 0.0;
  const double ft = std::floor(trials);
  if (ft < double(m)) return 1.0;
  const auto T = std::uint32_t(ft);
  // Fewer than m successes in the first T trials.
  double acc = 0.0;
  for (std::uint32_t i = 0; i < m; ++i)
    acc += binom(T, i) * std::pow(p, double(i)) *
           std::pow(1.0 - p, double(T - i));
  return std::min(1.0, acc);
}

std::uint32_t span_bound_for(double beta_r, std::uint32_t ell_out, double xi) {
  if (!(beta_r > 0.0) || !(beta_r <= 1.0))
    throw std::invalid_argument("beta_r out of range");
  if (ell_out < 2) throw std::invalid_argument("span bound needs ell_out >= 2");
  if (!(xi > 0.0) || !(xi < 1.0))
    throw std::invalid_argument("tail budget must lie in (0, 1)");
  const double m = double(ell_out - 1);
  const double t = std::max(2.0, 8.0 * std::log(1.0 / xi) / m);
  return std::uint32_t(std::ceil(t * m / beta_r));
}

DegradeResult degrade_subword_stats(const SubwordSignature& sig,
                                    const DegradeSpec& spec, std::uint32_t k,
                                    double input_tol) {
  spec.validate();
  if (sig.n == 0) throw std::invalid_argument("empty signature");
  if (sig.ell != spec.ell_in)
    throw std::invalid_argument("signature window does not match the spec");
  if (!(input_tol >= 0.0)) throw std::invalid_argument("negative tolerance");

  const std::uint32_t n = sig.n;
  const std::uint32_t lo = spec.ell_out;
  const double p = spec.beta_r;
  const double q = 1.0 - p;
  const std::size_t npat = std::size_t(1) << lo;

  DegradeResult out;
  out.phat.assign(npat, 0.0);
  out.input_tol = input_tol * double(std::size_t(1) << (spec.ell_in - 1));

  std::uint32_t span = 0;
  if (lo >= 2) {
    span = span_bound_for(p, lo, spec.xi);
    out.tail_mass = negbin_tail_exact(lo - 1, p, double(span));
  }

  // The k-th target bit reads the (k+1)-th retained position. Starts at or
  // past n, and any escape past position n-1, read deterministic zeros.
  if (k >= n) {
    out.phat[0] = 1.0;
    return out;
  }
  // Largest offset any nonzero-mass outcome can read. With beta_r = 1 the
  // gaps are deterministically 1, so the reach is just the window itself.
  const std::uint32_t reach =
      q == 0.0 ? lo - 1 : std::min(span, n - 1 - k);
  if (sig.ell < reach + 1)
    throw std::invalid_argument("signature window too small for the span");

  const std::uint32_t rank = k + 1;
  // Pr[first selected position = j], exact start marginal.
  const auto startp = [&](std::uint32_t j) {
    return binom(j, rank - 1) * std::pow(p, double(rank)) *
           std::pow(q, double(j - (rank - 1)));
  };

  auto chunk = [&](std::size_t jlo, std::size_t jhi) {
    std::vector<double> part(npat + 1, 0.0);  // last slot: covered start mass
    std::vector<double> mtab;
    std::vector<std::uint32_t> offs;
    for (std::size_t j = jlo; j < jhi; ++j) {
      const double sj = startp(std::uint32_t(j));
      part[npat] += sj;
      if (sj == 0.0) continue;
      const std::uint32_t horizon = std::uint32_t(n - 1 - j);
      const std::uint32_t lim = std::min(span, horizon);

      // Leaf: offsets offs (count c) hold the in-range reads; target bits
      // at and past c are forced to zero when c < lo.
      const auto emit = [&](double mass) {
        const std::uint32_t c = std::uint32_t(offs.size());
        mtab.assign(std::size_t(1) << c, 0.0);
        for (std::size_t u = 0; u < sig.patterns(); ++u) {
          std::size_t key = 0;
          for (std::uint32_t m = 0; m < c; ++m)
            key |= ((u >> offs[m]) & 1u) << m;
          mtab[key] += sig.at(j, u);
        }
        const std::size_t keep = (std::size_t(1) << c) - 1;
        for (std::size_t w = 0; w < npat; ++w) {
          if ((w >> c) != 0) continue;
          part[w] += mass * mtab[w & keep];
        }
      };

      offs.assign(1, 0u);
      auto walk = [&](auto&& self, std::uint32_t o, double mass) -> void {
        if (offs.size() == lo) {
          emit(mass);
          return;
        }
        double gm = mass * p;
        for (std::uint32_t g = 1; o + g <= lim && gm > 0.0; ++g) {
          offs.push_back(o + g);
          self(self, o + g, gm);
          offs.pop_back();
          gm *= q;
        }
        // Next retained position escapes past n-1; later ones follow.
        const double esc = mass * std::pow(q, double(horizon - o));
        if (esc > 0.0) emit(esc);
      };
      walk(walk, 0, sj);
    }
    return part;
  };
  auto fold = [&](std::vector<double> acc, const std::vector<double>& part) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += part[i];
    return acc;
  };
  const auto part = parallel_reduce(std::size_t(k), std::size_t(n),
                                    std::vector<double>(npat + 1, 0.0), chunk,
                                    fold);
  for (std::size_t w = 0; w < npat; ++w) out.phat[w] = part[w];
  // Starts at or past n leave the whole window all-zero.
  out.phat[0] += std::max(0.0, 1.0 - part[npat]);
  return out;
}

double compose_channels_check(const BitString& x, double delta, double delta2,
                              std::uint32_t ell_out) {
  if (x.size() == 0 || x.size() > 12)
    throw std::invalid_argument("exact check covers 1 <= n <= 12");
  if (ell_out < 1 || ell_out > x.size())
    throw std::invalid_argument("window length out of range");
  const auto n = std::uint32_t(x.size());
  // xi small enough that the span bound covers the whole string, making the
  // assembly exact up to rounding.
  const auto spec = DegradeSpec::make(delta, delta2, n, ell_out, 2e-14);

  const auto sig = exact_subword_signature(x, ChannelParams::of(delta), n);
  const auto got = degrade_subword_stats(sig, spec, 0);

  const auto want =
      exact_subword_signature(x, ChannelParams::of(delta2), ell_out);
  double l1 = 0.0;
  for (std::size_t w = 0; w < got.phat.size(); ++w)
    l1 += std::abs(got.phat[w] - want.at(0, w));
  return 0.5 * l1;
}

}  // namespace trsq
