#include "trsq/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "trsq/parallel.hpp"

namespace trsq {

namespace {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

// |sum_j u_j w^j| at w = 1 + r e^{i phi}, Horner
double modulus_at(const std::vector<int>& u, double r, double phi) {
  const Complex w(1.0 + r * std::cos(phi), r * std::sin(phi));
  Complex acc = 0.0;
  for (std::size_t j = u.size(); j-- > 0;) acc = acc * w + double(u[j]);
  return std::abs(acc);
}

// plain sampled boundary max, no refinement; screening workhorse
double sampled_max(const std::vector<int>& u, double r, unsigned samples,
                   double* arg_phi = nullptr) {
  double best = -1.0, best_phi = 0.0;
  for (unsigned s = 0; s < samples; ++s) {
    const double phi = 2.0 * kPi * s / samples;
    const double v = modulus_at(u, r, phi);
    if (v > best) {
      best = v;
      best_phi = phi;
    }
  }
  if (arg_phi) *arg_phi = best_phi;
  return best;
}

std::vector<int> decode_ternary(std::uint64_t code, unsigned len) {
  std::vector<int> u(len);
  for (unsigned j = 0; j < len; ++j) {
    u[j] = int(code % 3) - 1;
    code /= 3;
  }
  return u;
}

bool all_zero(const std::vector<int>& u) {
  for (int v : u)
    if (v != 0) return false;
  return true;
}

// first nonzero entry is +1; u and -u share the objective
bool normalized(const std::vector<int>& u) {
  for (int v : u) {
    if (v > 0) return true;
    if (v < 0) return false;
  }
  return false;  // all zero
}

// coefficients of prod_i (1 - w^{2^i}): sign (-1)^{popcount}, length 2^j
std::vector<int> product_vector(unsigned len_pow2) {
  std::vector<int> u(len_pow2);
  for (unsigned m = 0; m < len_pow2; ++m)
    u[m] = popcount32(m) % 2 == 0 ? 1 : -1;
  return u;
}

std::vector<std::vector<double>> pascal(std::size_t n) {
  std::vector<std::vector<double>> c(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    c[j].assign(j + 1, 1.0);
    for (std::size_t i = 1; i < j; ++i) c[j][i] = c[j - 1][i - 1] + c[j - 1][i];
  }
  return c;
}

}  // namespace

GappyString build_gappy(const BitString& b, unsigned t) {
  if (t < 1) throw std::invalid_argument("gap parameter must be positive");
  GappyString g;
  g.blocks = b;
  g.t = t;
  g.expanded = BitString(b.size() * t);
  for (std::size_t j = 0; j < b.size(); ++j) g.expanded.set(j * t, b[j]);
  return g;
}

bool is_gappy(const BitString& x, unsigned t) {
  if (t < 1 || x.empty() || x.size() % t != 0) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (j % t != 0 && x[j] != 0) return false;
  return true;
}

unsigned gappy_parameter(const BitString& x) {
  for (unsigned t = unsigned(x.size()); t >= 2; --t)
    if (x.size() % t == 0 && is_gappy(x, t)) return t;
  return 0;
}

void TernaryVector::validate() const {
  if (u.size() != std::size_t(k) + 1)
    throw std::invalid_argument("sign vector length must be k + 1");
  bool nonzero = false;
  for (int v : u) {
    if (v < -1 || v > 1)
      throw std::invalid_argument("sign vector entries must be in {-1,0,1}");
    if (v != 0) nonzero = true;
  }
  if (!nonzero) throw std::invalid_argument("sign vector must be nonzero");
}

double be_objective(const TernaryVector& u, double radius, unsigned samples) {
  u.validate();
  if (!(radius > 0.0 && radius < 1.0))
    throw std::invalid_argument("disk radius must lie in (0, 1)");
  if (samples < 8) throw std::invalid_argument("need at least 8 samples");
  double phi0 = 0.0;
  double best = sampled_max(u.u, radius, samples, &phi0);
  // one refinement pass across the two cells around the maximizing sample
  const double step = 2.0 * kPi / samples;
  for (unsigned s = 0; s <= 64; ++s) {
    const double phi = phi0 - step + 2.0 * step * s / 64;
    best = std::max(best, modulus_at(u.u, radius, phi));
  }
  return best;
}

TernaryVector be_search(double radius, unsigned kmax, const BeBudget& budget) {
  if (!(radius > 0.0 && radius < 1.0))
    throw std::invalid_argument("disk radius must lie in (0, 1)");
  const unsigned len = kmax + 1;

  TernaryVector best;
  best.k = kmax;
  double best_fine = std::numeric_limits<double>::infinity();
  const auto consider_fine = [&](const std::vector<int>& u) {
    TernaryVector t;
    t.u = u;
    t.k = kmax;
    const double v = be_objective(t, radius, budget.fine_samples);
    if (v < best_fine) {
      best_fine = v;
      best = t;
    }
  };

  if (kmax <= 12) {
    std::uint64_t total = 1;
    for (unsigned j = 0; j < len; ++j) total *= 3;

    // coarse screen, keeping the best few per chunk; ties break on the code
    // so the scan order (and thread count) cannot change the outcome
    using Scored = std::pair<double, std::uint64_t>;
    const auto chunk_fn = [&](std::size_t lo, std::size_t hi) {
      std::vector<Scored> top;
      for (std::size_t code = lo; code < hi; ++code) {
        const auto u = decode_ternary(code, len);
        if (!normalized(u)) continue;
        top.emplace_back(sampled_max(u, radius, budget.coarse_samples),
                         std::uint64_t(code));
      }
      std::sort(top.begin(), top.end());
      if (top.size() > budget.keep_top) top.resize(budget.keep_top);
      return top;
    };
    const auto fold = [&](std::vector<Scored> acc, std::vector<Scored> part) {
      acc.insert(acc.end(), part.begin(), part.end());
      std::sort(acc.begin(), acc.end());
      if (acc.size() > budget.keep_top) acc.resize(budget.keep_top);
      return acc;
    };
    const auto survivors = parallel_reduce(std::size_t(0), std::size_t(total),
                                           std::vector<Scored>{}, chunk_fn,
                                           fold, 1024);
    for (const auto& [score, code] : survivors)
      consider_fine(decode_ternary(code, len));
    return best;
  }

  // local search: steepest single-coordinate descent from seeded starts
  std::vector<std::vector<int>> starts;
  unsigned p2 = 1;
  while (p2 * 2 <= len) p2 *= 2;
  if (p2 >= 4) {
    auto seed_u = product_vector(p2);
    seed_u.resize(len, 0);
    starts.push_back(std::move(seed_u));
  }
  Rng rng(budget.seed);
  while (starts.size() < budget.restarts) {
    std::vector<int> u(len);
    for (auto& v : u) v = int(rng.below(3)) - 1;
    if (all_zero(u)) u[0] = 1;
    starts.push_back(std::move(u));
  }

  for (auto& u : starts) {
    double cur = sampled_max(u, radius, budget.coarse_samples);
    for (unsigned move = 0; move < budget.max_moves; ++move) {
      double cand_val = cur;
      unsigned cand_j = 0;
      int cand_v = 0;
      bool found = false;
      for (unsigned j = 0; j < len; ++j) {
        const int old = u[j];
        for (int v = -1; v <= 1; ++v) {
          if (v == old) continue;
          u[j] = v;
          if (!all_zero(u)) {
            const double s = sampled_max(u, radius, budget.coarse_samples);
            if (s < cand_val - 1e-15) {
              cand_val = s;
              cand_j = j;
              cand_v = v;
              found = true;
            }
          }
        }
        u[j] = old;
      }
      if (!found) break;
      u[cand_j] = cand_v;
      cur = cand_val;
    }
    consider_fine(u);
  }
  return best;
}

double measure_window_radius(std::uint32_t n, unsigned t,
                             const ChannelParams& ch, double window_mult) {
  if (n < 2 || t < 1) throw std::invalid_argument("degenerate window");
  if (!(window_mult > 0))
    throw std::invalid_argument("window multiplier must be positive");
  const double rho = ch.rho();
  const double m_hat =
      window_mult * std::pow(double(n), 0.2) / std::pow(std::log(double(n)), 0.4);
  const double theta_w = 1.0 / (m_hat * t);

  const auto dist = [&](double theta) {
    const Complex w(1.0 - rho + rho * std::cos(theta), rho * std::sin(theta));
    Complex p = 1.0;
    for (unsigned i = 0; i < t; ++i) p *= w;
    return std::abs(1.0 - p);
  };
  // even in theta; the arc is tiny so a fine one-sided scan suffices
  double best = 0.0, arg = 0.0;
  const unsigned kSamples = 257;
  for (unsigned s = 0; s < kSamples; ++s) {
    const double theta = theta_w * s / (kSamples - 1);
    const double v = dist(theta);
    if (v > best) {
      best = v;
      arg = theta;
    }
  }
  const double step = theta_w / (kSamples - 1);
  for (unsigned s = 0; s <= 64; ++s) {
    const double theta =
        std::min(theta_w, std::max(0.0, arg - step + 2.0 * step * s / 64));
    best = std::max(best, dist(theta));
  }
  return best;
}

HardPair construct_hard_pair(std::uint32_t n, const ChannelParams& ch,
                             const HardPairOverrides& overrides) {
  unsigned t = overrides.t;
  if (t == 0) {
    if (n % 4 == 0)
      t = 4;
    else if (n % 2 == 0)
      t = 2;
    else
      throw std::invalid_argument("no usable gap parameter divides n");
  }
  if (t < 2 || n % t != 0)
    throw std::invalid_argument("gap parameter must divide n and be >= 2");
  const unsigned blocks = n / t;
  if (blocks % 2 != 0)
    throw std::invalid_argument("block count must be even for the zero prefix");
  const unsigned pad = blocks / 2;
  if (pad < 1) throw std::invalid_argument("no room for the sign vector");
  const unsigned k = std::min(overrides.kcap, pad - 1);

  double radius = overrides.radius;
  if (radius <= 0.0)
    radius = std::min(measure_window_radius(n, t, ch, overrides.window_mult),
                      0.95);

  HardPair hp;
  hp.t = t;
  hp.radius = radius;
  hp.u = be_search(radius, k, overrides.budget);
  hp.objective = be_objective(hp.u, radius, overrides.budget.fine_samples);

  BitString b(blocks), b2(blocks);
  for (unsigned j = 0; j <= k; ++j) {
    if (hp.u.u[j] > 0) b.set(pad + j, 1);
    if (hp.u.u[j] < 0) b2.set(pad + j, 1);
  }
  hp.ga = build_gappy(b, t);
  hp.ga2 = build_gappy(b2, t);
  hp.a = hp.ga.expanded;
  hp.a2 = hp.ga2.expanded;
  return hp;
}

PairCertificate certify_pair(const BitString& a, const BitString& a2,
                             const ChannelParams& ch, unsigned ell) {
  if (a.size() != a2.size())
    throw std::invalid_argument("strings must have equal length");
  if (ell < 1 || ell > a.size())
    throw std::invalid_argument("pattern length out of range");
  const std::size_t n = a.size();

  unsigned t = 0;
  for (unsigned cand = unsigned(n); cand >= 2; --cand)
    if (n % cand == 0 && is_gappy(a, cand) && is_gappy(a2, cand)) {
      t = cand;
      break;
    }
  if (t == 0)
    throw std::invalid_argument("inputs are not gappy with a common parameter");

  PairCertificate cert;
  cert.a = a;
  cert.a2 = a2;
  cert.ell = ell;
  cert.t = t;

  const auto pa = exact_one_bit_stats_rational(a, ch);
  const auto pa2 = exact_one_bit_stats_rational(a2, ch);
  for (std::size_t i = 0; i < n; ++i) {
    const Rational d = abs(Rational(pa[i] - pa2[i]));
    cert.one_bit_gap = std::max(cert.one_bit_gap, d);
  }

  const auto sa = exact_subword_signature_rational(a, ch, ell);
  const auto sa2 = exact_subword_signature_rational(a2, ch, ell);
  const unsigned patterns = 1u << ell;
  for (std::size_t i = 0; i < n; ++i)
    for (unsigned w = 0; w < patterns; ++w) {
      const Rational d = abs(Rational(sa.at(i, w) - sa2.at(i, w)));
      cert.signature_gap = std::max(cert.signature_gap, d);
      const unsigned weight = popcount32(w);
      if (weight == 0)
        cert.gap_zero = std::max(cert.gap_zero, d);
      else if (weight == 1)
        cert.gap_one = std::max(cert.gap_one, d);
      else
        cert.gap_heavy = std::max(cert.gap_heavy, d);
    }

  // heaviest combined weight->=2 mass through any single window coordinate
  for (std::size_t i = 0; i < n; ++i)
    for (unsigned alpha = 0; alpha < ell; ++alpha) {
      Rational mass;
      for (unsigned w = 0; w < patterns; ++w)
        if ((w >> alpha & 1u) && popcount32(w) >= 2)
          mass += sa.at(i, w) + sa2.at(i, w);
      cert.heavy_mass = std::max(cert.heavy_mass, mass);
    }

  cert.weight1_bound = cert.one_bit_gap + cert.heavy_mass;
  cert.zero_bound =
      Rational(patterns - 1) * std::max(cert.gap_heavy, cert.gap_one);
  const Rational half_patterns(std::uint64_t(1) << (ell - 1));
  cert.chain_ok = cert.gap_one <= cert.weight1_bound &&
                  cert.gap_zero <= cert.zero_bound &&
                  cert.signature_gap * half_patterns >= cert.one_bit_gap;
  return cert;
}

void JuntaQuery::validate(std::size_t n) const {
  if (positions.empty()) throw std::invalid_argument("empty index set");
  if (positions.size() > 20)
    throw std::invalid_argument("index set too large");
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (k > 0 && positions[k] <= positions[k - 1])
      throw std::invalid_argument("indices must be strictly increasing");
    if (positions[k] >= n) throw std::invalid_argument("index past the string");
  }
  if (table.size() != (std::size_t(1) << positions.size()))
    throw std::invalid_argument("table size mismatch");
  for (double v : table)
    if (!(std::abs(v) <= 1.0))
      throw std::invalid_argument("table values must lie in [-1, 1]");
}

MiddleBitResult middle_bit_gap(const BitString& x, const ChannelParams& ch,
                               const JuntaQuery& q) {
  const std::size_t n = x.size();
  if (n == 0 || n % 2 != 0)
    throw std::invalid_argument("middle-bit argument needs even length");
  q.validate(n);
  const BitString x2 = x.with_flipped(n / 2);

  double diff = 0.0;
  for (unsigned w = 0; w < (1u << q.positions.size()); ++w) {
    if (q.table[w] == 0.0) continue;
    diff += q.table[w] * (joint_trace_match(x, ch, q.positions, w) -
                          joint_trace_match(x2, ch, q.positions, w));
  }

  const double rho = ch.rho();
  const double delta = ch.delta();
  const auto c = pascal(n / 2);
  double bound = 0.0;
  for (const std::uint32_t i : q.positions) {
    if (i > n / 2) continue;  // position cannot hold the middle source bit
    bound += 2.0 * c[n / 2][i] * std::pow(rho, double(i) + 1.0) *
             std::pow(delta, double(n / 2 - i));
  }
  return {std::abs(diff), bound};
}

}  // namespace trsq
