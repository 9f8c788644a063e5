#include "trsq/worst_case.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include "trsq/detail/tuple_iter.hpp"
#include "trsq/rational.hpp"

namespace trsq {

namespace {

// Pascal rows in double; entries stay far below 2^53 at supported lengths.
std::vector<std::vector<double>> pascal(std::size_t n) {
  std::vector<std::vector<double>> c(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    c[j].assign(j + 1, 1.0);
    for (std::size_t i = 1; i < j; ++i) c[j][i] = c[j - 1][i - 1] + c[j - 1][i];
  }
  return c;
}

std::uint64_t lex_key(std::uint32_t word, std::uint32_t n) {
  std::uint64_t k = 0;
  for (std::uint32_t j = 0; j < n; ++j)
    k |= std::uint64_t((word >> j) & 1u) << (n - 1 - j);
  return k;
}

}  // namespace

WorstCaseParams WorstCaseParams::for_length(std::uint32_t n) {
  WorstCaseParams p;
  const double raw = 2.0 * std::pow(double(n), 0.2);
  const unsigned cap = std::min<unsigned>(n, 12);
  p.ell = std::max(1u, std::min(cap, unsigned(std::lround(raw))));
  p.d0 = std::max(p.ell, n > p.ell ? n - p.ell : p.ell);
  return p;
}

void WorstCaseParams::validate() const {
  if (ell < 1) throw std::invalid_argument("pattern length must be positive");
  if (d0 < ell) throw std::invalid_argument("slack cutoff below pattern length");
  if (!(tau0 > 0)) throw std::invalid_argument("tolerance must be positive");
  if (arc_points < 3 || seg_points < 3)
    throw std::invalid_argument("grids need at least 3 points");
}

MeanBasedResult mean_based_reconstruct(SqOracle& oracle, double tau) {
  const std::size_t n = oracle.source().size();
  const ChannelParams& ch = oracle.channel();
  const double rho = ch.rho();
  const double delta = ch.delta();

  std::vector<double> phat(n);
  for (std::size_t i = 0; i < n; ++i)
    phat[i] = oracle.answer(LocalQuery::dictator(i, 1, 0), tau);

  const auto c = pascal(n);
  std::vector<double> rpow(n + 1, 1.0), dpow(n + 1, 1.0);
  for (std::size_t k = 1; k <= n; ++k) {
    rpow[k] = rpow[k - 1] * rho;
    dpow[k] = dpow[k - 1] * delta;
  }

  MeanBasedResult out;
  out.recovered = BitString(n);
  std::vector<int> xhat(n, 0);
  for (std::size_t ii = n; ii-- > 0;) {
    double r = phat[ii];
    for (std::size_t j = ii + 1; j < n; ++j)
      if (xhat[j]) r -= c[j][ii] * rpow[ii + 1] * dpow[j - ii];
    const double raw = r / rpow[ii + 1];
    const int bit = raw >= 0.5 ? 1 : 0;
    const double residual = std::abs(raw - bit);
    out.worst_residual = std::max(out.worst_residual, residual);
    if (residual > 0.25) {
      out.failed = true;
      out.first_bad = std::uint32_t(ii);
      return out;
    }
    xhat[ii] = bit;
    out.recovered.set(ii, bit);
  }
  return out;
}

BitString mean_based_invert_rational(const std::vector<Rational>& p,
                                     std::uint32_t n,
                                     const ChannelParams& ch) {
  if (p.size() != n)
    throw std::invalid_argument("marginal vector length mismatch");
  const Rational rho = ch.rho_exact();
  const Rational delta = ch.delta_exact();
  const Rational half(1, 2);

  std::vector<Rational> rpow(n + 1, Rational(1)), dpow(n + 1, Rational(1));
  for (std::uint32_t k = 1; k <= n; ++k) {
    rpow[k] = rpow[k - 1] * rho;
    dpow[k] = dpow[k - 1] * delta;
  }

  BitString x(n);
  for (std::uint32_t ii = n; ii-- > 0;) {
    Rational r = p[ii];
    for (std::uint32_t j = ii + 1; j < n; ++j)
      if (x[j])
        r -= Rational(binomial_big(j, ii)) * rpow[ii + 1] * dpow[j - ii];
    const Rational raw = r / rpow[ii + 1];
    x.set(ii, raw >= half ? 1 : 0);
  }
  return x;
}

Complex estimate_Q_truncated(SqOracle& oracle, unsigned ell, unsigned widx,
                             Complex z, double t,
                             const WorstCaseParams& params) {
  params.validate();
  const std::size_t n = oracle.source().size();
  if (ell < 1 || ell > n)
    throw std::invalid_argument("pattern length out of range");
  if (widx >= (1u << ell)) throw std::invalid_argument("pattern out of range");

  const double rho = oracle.channel().rho();
  const Complex zeta1 = (z - (1.0 - rho)) / rho;
  const Complex zeta2 = (Complex(t) - (1.0 - rho)) / rho;
  const std::size_t d0 = std::min<std::size_t>(params.d0, n - ell);

  std::vector<Complex> z1pow(n), z2pow(d0 + 1);
  z1pow[0] = 1.0;
  for (std::size_t j = 1; j < n; ++j) z1pow[j] = z1pow[j - 1] * zeta1;
  z2pow[0] = 1.0;
  for (std::size_t d = 1; d <= d0; ++d) z2pow[d] = z2pow[d - 1] * zeta2;

  // window answers, tabulated once per (start, span) over every content
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<double>> tabs;
  const auto window = [&](std::uint32_t j1,
                          std::uint32_t span) -> const std::vector<double>& {
    auto [it, fresh] = tabs.try_emplace({j1, span});
    if (fresh) {
      auto& tab = it->second;
      tab.resize(std::size_t(1) << span);
      for (std::size_t u = 0; u < tab.size(); ++u) {
        LocalQuery q = LocalQuery::pattern_indicator(j1, span, unsigned(u));
        q.strict_tail = true;
        tab[u] = oracle.answer(q, params.tau0);
      }
    }
    return it->second;
  };

  Complex acc = 0.0;
  std::vector<std::uint32_t> free_off;
  detail::for_each_tuple(
      n, ell, d0,
      [&](const std::vector<std::uint32_t>& idx, std::size_t slack) {
        const std::uint32_t j1 = idx[0];
        const std::uint32_t span = std::uint32_t(slack) + ell;
        const auto& tab = window(j1, span);

        std::uint32_t base = 0, used = 0;
        for (unsigned k = 0; k < ell; ++k) {
          const std::uint32_t off = idx[k] - j1;
          base |= std::uint32_t(pattern_bit(widx, k)) << off;
          used |= 1u << off;
        }
        free_off.clear();
        for (std::uint32_t o = 0; o < span; ++o)
          if (!(used >> o & 1u)) free_off.push_back(o);

        // sum the window contents that spell w on the tuple's offsets
        double phat = 0.0;
        for (std::uint32_t m = 0; m < (1u << free_off.size()); ++m) {
          std::uint32_t u = base;
          for (std::size_t b = 0; b < free_off.size(); ++b)
            u |= ((m >> b) & 1u) << free_off[b];
          phat += tab[u];
        }
        acc += phat * z1pow[j1] * z2pow[slack];
      });

  Complex rl = 1.0;
  for (unsigned k = 0; k < ell; ++k) rl *= rho;
  return acc / rl;
}

double estimate_Q_error_multiplier(std::uint32_t n, unsigned ell, Complex z,
                                   double t, unsigned d0,
                                   const ChannelParams& ch) {
  if (ell < 1 || ell > n)
    throw std::invalid_argument("pattern length out of range");
  const double rho = ch.rho();
  const double a1 = std::abs((z - (1.0 - rho)) / rho);
  const double a2 = std::abs((t - (1.0 - rho)) / rho);
  const std::size_t deff = std::min<std::size_t>(d0, n - ell);

  std::vector<double> p1(n), p2(deff + 1);
  p1[0] = 1.0;
  for (std::size_t j = 1; j < n; ++j) p1[j] = p1[j - 1] * a1;
  p2[0] = 1.0;
  for (std::size_t d = 1; d <= deff; ++d) p2[d] = p2[d - 1] * a2;

  double acc = 0.0;
  detail::for_each_tuple(
      n, ell, deff,
      [&](const std::vector<std::uint32_t>& idx, std::size_t slack) {
        acc += double(std::uint64_t(1) << slack) * p1[idx[0]] * p2[slack];
      });
  return acc / std::pow(rho, double(ell));
}

DistinguisherCertificate find_distinguisher(const BitString& x1,
                                            const BitString& x2,
                                            const ChannelParams& ch,
                                            const WorstCaseParams& params) {
  params.validate();
  if (x1.size() != x2.size())
    throw std::invalid_argument("strings must have equal length");
  if (x1 == x2) throw std::invalid_argument("strings must differ");
  const std::size_t n = x1.size();
  const unsigned ell = params.ell;
  if (n < ell) throw std::invalid_argument("strings shorter than the pattern");

  const double rho = ch.rho();
  const double theta_max = std::pow(double(n), -0.4);
  const double seg_lo = 1.0 - rho;
  const double seg_hi = 1.0 - 0.75 * rho;

  bool prefix_eq = true;
  unsigned wpre = 0;
  for (unsigned k = 0; k < ell; ++k) {
    if (x1[k] != x2[k]) prefix_eq = false;
    wpre |= unsigned(x1[k]) << k;
  }
  std::vector<unsigned> patterns;
  if (!prefix_eq)
    patterns.push_back(wpre);
  else
    for (unsigned w = 0; w < (1u << ell); ++w) patterns.push_back(w);

  const auto gap_at = [&](unsigned w, Complex z, double t) {
    return std::abs(source_poly_P(x1, ell, w, z, Complex(t)) -
                    source_poly_P(x2, ell, w, z, Complex(t)));
  };

  DistinguisherCertificate best;
  best.ell = ell;
  best.gap = -1.0;
  // z axis: 0 = arc parameterized by theta, 1 = real segment
  int best_axis = 0;
  double best_zpar = 0.0;

  const auto scan = [&](const std::vector<unsigned>& ws, int axis, double zlo,
                        double zhi, unsigned zpts, double tlo, double thi,
                        unsigned tpts) {
    for (unsigned w : ws)
      for (unsigned a = 0; a < zpts; ++a) {
        const double zp = zlo + (zhi - zlo) * a / (zpts - 1);
        const Complex z = axis == 0
                              ? Complex(std::cos(zp), std::sin(zp))
                              : Complex(zp);
        for (unsigned b = 0; b < tpts; ++b) {
          const double t = tlo + (thi - tlo) * b / (tpts - 1);
          const double g = gap_at(w, z, t);
          if (g > best.gap) {
            best.gap = g;
            best.widx = w;
            best.z = z;
            best.t = t;
            best_axis = axis;
            best_zpar = zp;
          }
        }
      }
  };

  scan(patterns, 0, -theta_max, theta_max, params.arc_points, seg_lo, seg_hi,
       params.seg_points);
  scan(patterns, 1, seg_lo, seg_hi, params.seg_points, seg_lo, seg_hi,
       params.seg_points);

  // one refinement pass: zoom one grid step around the best cell, best w only
  {
    const std::vector<unsigned> wbest{best.widx};
    const int axis = best_axis;
    const double zstep =
        axis == 0 ? 2.0 * theta_max / (params.arc_points - 1)
                  : (seg_hi - seg_lo) / (params.seg_points - 1);
    const double zlo = std::max(axis == 0 ? -theta_max : seg_lo,
                                best_zpar - zstep);
    const double zhi =
        std::min(axis == 0 ? theta_max : seg_hi, best_zpar + zstep);
    const double tstep = (seg_hi - seg_lo) / (params.seg_points - 1);
    const double tlo = std::max(seg_lo, best.t - tstep);
    const double thi = std::min(seg_hi, best.t + tstep);
    const unsigned zpts = axis == 0 ? params.arc_points : params.seg_points;
    scan(wbest, axis, zlo, zhi, zpts, tlo, thi, params.seg_points);
  }

  best.flagged = !(best.gap > params.gap_floor);
  return best;
}

PairwiseResult pairwise_reconstruct(SqOracle& oracle,
                                    const WorstCaseParams& params) {
  params.validate();
  const std::size_t n = oracle.source().size();
  if (n > 14)
    throw std::invalid_argument("candidate sweep is exponential; n > 14");
  if (n < params.ell)
    throw std::invalid_argument("source shorter than the pattern");
  const ChannelParams& ch = oracle.channel();
  const unsigned ell = params.ell;
  const std::uint64_t q0 = oracle.ledger().count;

  std::vector<std::uint32_t> cand(std::size_t(1) << n);
  for (std::uint32_t w = 0; w < cand.size(); ++w) cand[w] = w;
  std::sort(cand.begin(), cand.end(), [&](std::uint32_t a, std::uint32_t b) {
    return lex_key(a, std::uint32_t(n)) < lex_key(b, std::uint32_t(n));
  });

  PairwiseResult out;
  out.min_gap = std::numeric_limits<double>::infinity();
  while (cand.size() > 1) {
    const BitString a = BitString::from_word(cand[0], n);
    const BitString b = BitString::from_word(cand[1], n);
    const auto cert = find_distinguisher(a, b, ch, params);
    ++out.rounds;
    if (!(cert.gap > 0)) {
      // grid saw no separation; drop the lexicographically larger contender
      cand.erase(cand.begin() + 1);
      continue;
    }
    out.min_gap = std::min(out.min_gap, cert.gap);

    // split the 0.1*gap estimate budget across window queries
    const double mult = estimate_Q_error_multiplier(
        std::uint32_t(n), ell, cert.z, cert.t, params.d0, ch);
    WorstCaseParams run = params;
    run.tau0 = 0.1 * cert.gap / mult;
    const Complex vhat =
        estimate_Q_truncated(oracle, ell, cert.widx, cert.z, cert.t, run);

    std::vector<std::uint32_t> keep;
    keep.reserve(cand.size());
    for (std::uint32_t c : cand) {
      const Complex pc = source_poly_P(BitString::from_word(c, n), ell,
                                       cert.widx, cert.z, Complex(cert.t));
      if (std::abs(pc - vhat) <= 0.5 * cert.gap) keep.push_back(c);
    }
    if (keep.empty()) {
      out.ambiguous = true;
      out.recovered = a;
      break;
    }
    if (keep.size() == cand.size()) {
      // midpoint tie; the estimate sits strictly closer to the source than
      // to the impostor, so dropping the farther of the pair is safe
      const Complex pa = source_poly_P(a, ell, cert.widx, cert.z,
                                       Complex(cert.t));
      const Complex pb = source_poly_P(b, ell, cert.widx, cert.z,
                                       Complex(cert.t));
      const std::size_t drop =
          std::abs(pa - vhat) > std::abs(pb - vhat) ? 0 : 1;
      keep.erase(keep.begin() + drop);
    }
    cand = std::move(keep);
  }
  if (!out.ambiguous) out.recovered = BitString::from_word(cand[0], n);
  if (out.min_gap == std::numeric_limits<double>::infinity()) out.min_gap = 0.0;
  out.queries = oracle.ledger().count - q0;
  return out;
}

}  // namespace trsq
