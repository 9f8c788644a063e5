#include "trsq/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "trsq/detail/signature_dp.hpp"

namespace trsq {

namespace {

detail::SourceProbs<double> as_probs(const BitString& x) {
  detail::SourceProbs<double> src;
  src.p1.resize(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) src.p1[s] = double(x[s]);
  return src;
}

detail::SourceProbs<Rational> as_probs_rational(const BitString& x) {
  detail::SourceProbs<Rational> src;
  src.p1.resize(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) src.p1[s] = Rational(x[s]);
  return src;
}

}  // namespace

Trace sample_trace(const BitString& x, const ChannelParams& ch, Rng& rng) {
  Trace t;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const bool deleted = rng.bernoulli(ch.delta());
    if (!deleted) {
      t.bits.push_back(x[j]);
      t.origin.push_back(std::uint32_t(j));
    }
  }
  return t;
}

OneBitStats exact_one_bit_stats(const BitString& x, const ChannelParams& ch) {
  if (x.empty()) throw std::invalid_argument("exact_one_bit_stats: empty x");
  OneBitStats s;
  s.p = detail::one_bit_dp(as_probs(x), ch.rho(), ch.delta());
  return s;
}

std::vector<Rational> exact_one_bit_stats_rational(const BitString& x,
                                                   const ChannelParams& ch) {
  if (x.empty())
    throw std::invalid_argument("exact_one_bit_stats_rational: empty x");
  return detail::one_bit_dp(as_probs_rational(x), ch.rho_exact(),
                            ch.delta_exact());
}

SubwordSignature exact_subword_signature(const BitString& x,
                                         const ChannelParams& ch,
                                         unsigned ell) {
  SubwordSignature sig;
  sig.n = std::uint32_t(x.size());
  sig.ell = ell;
  sig.delta = ch.delta();
  sig.p = detail::signature_dp(as_probs(x), ch.rho(), ch.delta(), ell);
  return sig;
}

RationalSignature exact_subword_signature_rational(const BitString& x,
                                                   const ChannelParams& ch,
                                                   unsigned ell) {
  RationalSignature sig;
  sig.n = std::uint32_t(x.size());
  sig.ell = ell;
  sig.delta = ch.delta_exact();
  sig.p = detail::signature_dp(as_probs_rational(x), ch.rho_exact(),
                               ch.delta_exact(), ell);
  return sig;
}

SubwordSignature exact_subword_signature_prob(const std::vector<double>& p1,
                                              const ChannelParams& ch,
                                              unsigned ell) {
  for (double q : p1)
    if (!(q >= 0.0 && q <= 1.0))
      throw std::invalid_argument("signature_prob: p1 outside [0,1]");
  detail::SourceProbs<double> src{p1};
  SubwordSignature sig;
  sig.n = std::uint32_t(p1.size());
  sig.ell = ell;
  sig.delta = ch.delta();
  sig.p = detail::signature_dp(src, ch.rho(), ch.delta(), ell);
  return sig;
}

SubwordSignature brute_force_signature(const BitString& x,
                                       const ChannelParams& ch, unsigned ell) {
  const std::size_t n = x.size();
  if (n == 0 || ell < 1 || ell > n)
    throw std::invalid_argument("brute_force_signature: need 1 <= ell <= n");
  if (n > 24)
    throw std::invalid_argument(
        "brute_force_signature: n > 24 exceeds the enumeration budget");

  const std::uint32_t word_x = std::uint32_t(x.as_word());
  const std::size_t P = std::size_t(1) << ell;
  const std::uint32_t wmask = std::uint32_t(P - 1);

  // weight by retained count: rho^c * delta^(n-c)
  std::vector<double> weight(n + 1);
  for (std::size_t c = 0; c <= n; ++c)
    weight[c] = std::pow(ch.rho(), double(c)) * std::pow(ch.delta(), double(n - c));

  SubwordSignature sig;
  sig.n = std::uint32_t(n);
  sig.ell = ell;
  sig.delta = ch.delta();
  sig.p.assign(n * P, 0.0);

  const std::uint64_t subsets = std::uint64_t(1) << n;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    std::uint32_t trace = 0;
    unsigned c = 0;
    std::uint32_t m = std::uint32_t(mask);
    while (m) {
      const unsigned j = unsigned(__builtin_ctz(m));
      trace |= ((word_x >> j) & 1u) << c;
      ++c;
      m &= m - 1;
    }
    const double wgt = weight[c];
    for (std::size_t i = 0; i < n; ++i)
      sig.p[i * P + ((trace >> i) & wmask)] += wgt;
  }
  return sig;
}

MonteCarloSignature monte_carlo_signature(const BitString& x,
                                          const ChannelParams& ch, unsigned ell,
                                          std::uint64_t samples, Rng rng) {
  const std::size_t n = x.size();
  if (n == 0 || ell < 1 || ell > n)
    throw std::invalid_argument("monte_carlo_signature: need 1 <= ell <= n");
  if (samples == 0)
    throw std::invalid_argument("monte_carlo_signature: samples == 0");
  const std::size_t P = std::size_t(1) << ell;
  std::vector<std::uint64_t> tally(n * P, 0);

  const double rho = ch.rho();
  if (n <= 64) {
    const std::uint64_t word_x = x.as_word();
    const std::uint64_t wmask = (std::uint64_t(1) << ell) - 1;
    for (std::uint64_t s = 0; s < samples; ++s) {
      std::uint64_t trace = 0;
      unsigned c = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform() < rho) trace |= ((word_x >> j) & 1u) << c++;
      for (std::size_t i = 0; i < n; ++i)
        tally[i * P + std::size_t((trace >> i) & wmask)] += 1;
    }
  } else {
    std::vector<std::uint8_t> trace(n + ell, 0);
    for (std::uint64_t s = 0; s < samples; ++s) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform() < rho) trace[c++] = std::uint8_t(x[j]);
      for (std::size_t j = c; j < n + ell; ++j) trace[j] = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t widx = 0;
        for (unsigned k = 0; k < ell; ++k)
          widx |= std::size_t(trace[i + k]) << k;
        tally[i * P + widx] += 1;
      }
    }
  }

  MonteCarloSignature mc;
  mc.samples = samples;
  mc.freq.n = std::uint32_t(n);
  mc.freq.ell = ell;
  mc.freq.delta = ch.delta();
  mc.freq.p.resize(n * P);
  mc.stderr_.resize(n * P);
  const double inv = 1.0 / double(samples);
  for (std::size_t k = 0; k < tally.size(); ++k) {
    const double f = double(tally[k]) * inv;
    mc.freq.p[k] = f;
    mc.stderr_[k] = std::sqrt(f * (1.0 - f) * inv);
  }
  return mc;
}

double joint_trace_match(const BitString& x, const ChannelParams& ch,
                         const std::vector<std::uint32_t>& positions,
                         unsigned widx, TraceTail tail) {
  const std::size_t n = x.size();
  const std::size_t ell = positions.size();
  if (ell == 0) return 1.0;
  for (std::size_t k = 1; k < ell; ++k)
    if (positions[k] <= positions[k - 1])
      throw std::invalid_argument("joint_trace_match: positions not increasing");

  const std::size_t last = positions.back();
  const std::size_t cap = last + 1;  // trace counts > last collapse here

  // constraint[c] = pattern bit demanded at trace position c, or -1
  std::vector<int> constraint(cap, -1);
  for (std::size_t k = 0; k < ell; ++k)
    constraint[positions[k]] = pattern_bit(widx, unsigned(k));

  // zero-tail admissibility: ok to stop with final trace length c iff every
  // constrained position >= c demands 0
  std::vector<std::uint8_t> tail_ok(cap + 1, 1);
  for (std::size_t c = cap; c-- > 0;) {
    tail_ok[c] = tail_ok[c + 1] &&
                 (constraint[c] < 0 || constraint[c] == 0);
  }

  const double rho = ch.rho(), delta = ch.delta();
  std::vector<double> w(cap + 1, 0.0), nw(cap + 1, 0.0);
  w[0] = 1.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(nw.begin(), nw.end(), 0.0);
    const int bit = x[s];
    for (std::size_t c = 0; c <= cap; ++c) {
      const double mass = w[c];
      if (mass == 0.0) continue;
      nw[c] += delta * mass;
      if (c == cap) {
        nw[cap] += rho * mass;  // beyond every constraint
      } else if (constraint[c] < 0 || constraint[c] == bit) {
        nw[c + 1] += rho * mass;
      }
    }
    std::swap(w, nw);
  }
  double total = w[cap];  // trace reaches past the last queried position
  if (tail == TraceTail::kZeroPadded) {
    for (std::size_t c = 0; c < cap; ++c)
      if (tail_ok[c]) total += w[c];
  }
  return total;
}

std::vector<double> retained_position_pmf(std::size_t i, std::size_t n,
                                          const ChannelParams& ch) {
  return detail::retained_position_pmf<double>(i, n, ch.rho(), ch.delta());
}

std::vector<Rational> retained_position_pmf_rational(std::size_t i,
                                                     std::size_t n,
                                                     const ChannelParams& ch) {
  return detail::retained_position_pmf<Rational>(i, n, ch.rho_exact(),
                                                 ch.delta_exact());
}

}  // namespace trsq
