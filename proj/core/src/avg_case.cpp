#include "trsq/avg_case.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "trsq/degrade.hpp"
#include "trsq/parallel.hpp"
#include "trsq/worst_case.hpp"

namespace trsq {

namespace {

double binom_d(std::uint32_t top, std::uint32_t pick) {
  if (pick > top) return 0.0;
  pick = std::min(pick, top - pick);
  double acc = 1.0;
  for (std::uint32_t i = 1; i <= pick; ++i)
    acc *= double(top - pick + i) / double(i);
  return acc;
}

}  // namespace

void AvgParams::validate() const {
  if (n < 2) throw std::invalid_argument("block length too short");
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("failure budget must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("rate must lie in (0, 1)");
  if (k < 2 || k > 20)
    throw std::invalid_argument("pattern length out of range");
  const double th = (1.0 - delta) * (1.0 - delta) / 2.0;
  if (theta != th) throw std::invalid_argument("theta inconsistent");
  if (!(kappa > 0.0 && kappa < 1.0) || !(tau2 > 0.0 && tau2 < kappa))
    throw std::invalid_argument("accuracy targets out of range");
  if (!(Delta > 0.0) || !std::isfinite(Delta))
    throw std::invalid_argument("grid pitch must be positive");
  if (!(L >= 1.0)) throw std::invalid_argument("schedule infeasible");
  if (L != std::floor(((1.0 - delta) / 2.0) / Delta))
    throw std::invalid_argument("grid count inconsistent with its pitch");
  if (ell < k || ell > 26)
    throw std::invalid_argument("locality bound out of range");
}

AvgParams avg_params(std::uint32_t n, double eta, const ChannelParams& ch,
                     const AvgMultipliers& mult) {
  if (n < 2) throw std::invalid_argument("block length too short");
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("failure budget must lie in (0, 1)");
  const double delta = ch.delta();

  AvgParams pr;
  pr.n = n;
  pr.eta = eta;
  pr.delta = delta;
  pr.mult = mult;

  const double kr = mult.c_k * std::log(double(n) / eta);
  pr.k = std::max<std::uint32_t>(2, std::uint32_t(std::ceil(kr)));
  if (pr.k > 20) throw std::invalid_argument("pattern length out of range");

  pr.theta = (1.0 - delta) * (1.0 - delta) / 2.0;
  const double rho_half = (1.0 - delta) / 2.0;
  pr.kappa = std::pow(std::pow(rho_half, double(pr.k)) / double(n),
                      mult.c_kap / (1.0 - delta));
  pr.tau2 = pr.kappa * std::pow(rho_half, double(pr.k));

  const double cth = mult.big_c / pr.theta;
  if (!(cth > 1.0))
    throw std::invalid_argument("degree base must exceed 1");
  pr.d = std::uint32_t(
      std::ceil(cth * (std::log(double(n)) + double(pr.k) * std::log(cth))));

  pr.Delta = pr.kappa / (2.0 * double(pr.d) * double(pr.d) * double(n) *
                         binom_d(pr.d + pr.k - 2, pr.k - 2));
  pr.L = std::floor(rho_half / pr.Delta);

  const double le = mult.c_ell_k * double(pr.k) *
                        std::log(2.0 / (1.0 - delta)) / (1.0 - delta) +
                    mult.c_ell_n * std::log(double(n)) / (1.0 - delta);
  pr.ell = std::max<std::uint32_t>(pr.k, std::uint32_t(std::ceil(le)));
  if (pr.ell > 26)
    throw std::invalid_argument("locality bound out of range");

  pr.validate();
  return pr;
}

double expected_kmer_count(const SubwordSignature& sig2, std::uint32_t widx) {
  if (widx >= (std::uint32_t(1) << sig2.ell))
    throw std::invalid_argument("pattern wider than the signature window");
  double acc = 0.0;
  for (std::uint32_t j = 0; j < sig2.n; ++j) acc += sig2.at(j, widx);
  return acc;
}

SwEstimate estimate_SW(SqOracle& oracle, const AvgParams& pr,
                       std::uint32_t widx, double delta2) {
  pr.validate();
  const std::size_t n = oracle.source().size();
  if (n != pr.n)
    throw std::invalid_argument("oracle length does not match the schedule");
  if (oracle.channel().delta() != pr.delta)
    throw std::invalid_argument("oracle rate does not match the schedule");
  if ((widx >> pr.k) != 0)
    throw std::invalid_argument("pattern wider than k");
  if (!(delta2 >= pr.delta - 1e-15 &&
        delta2 <= (1.0 + pr.delta) / 2.0 + 1e-12))
    throw std::invalid_argument("target rate off the grid");

  const std::uint32_t k = pr.k;
  const double beta = (1.0 - delta2) / (1.0 - pr.delta);
  const double q = std::max(0.0, 1.0 - beta);

  SwEstimate out;
  out.query_tau = pr.tau2 / (2.0 * double(n));
  const double xi = out.query_tau;  // per-start uncovered-mass budget

  std::uint32_t span = pr.ell - 1;
  if (q == 0.0) {
    span = k - 1;
  } else {
    for (std::uint32_t s = k - 1; s < pr.ell; ++s) {
      if (negbin_tail_exact(k - 1, beta, double(s)) <= xi) {
        span = s;
        break;
      }
    }
  }
  out.span = span;

  double ew = 0.0;             // sum over u of W(u, widx)
  double covered_total = 0.0;  // sum over u of enumerated selector mass
  double tail_sum = 0.0;       // sum over u of span-truncated mass

  std::vector<std::uint32_t> offs;
  offs.reserve(k);
  double covered = 0.0;

  std::function<void(double)> walk = [&](double mass) {
    const std::uint32_t c = std::uint32_t(offs.size());
    const std::size_t base = std::size_t(offs[0]);  // absolute start u
    if (c == k) {
      SparseLocalQuery sq;
      sq.start = base;
      sq.offsets.resize(k);
      for (std::uint32_t m = 0; m < k; ++m) sq.offsets[m] = offs[m] - offs[0];
      sq.widx = widx;
      ew += mass * oracle.answer(sq, out.query_tau);
      covered += mass;
      return;
    }
    const std::uint32_t last = offs.back();
    // next retained position past the horizon: the rest reads the padding
    const double esc = mass * std::pow(q, double(n - 1 - last));
    covered += esc;
    if (esc > 0.0 && (widx >> c) == 0) {
      SparseLocalQuery sq;
      sq.start = base;
      sq.offsets.resize(c);
      for (std::uint32_t m = 0; m < c; ++m) sq.offsets[m] = offs[m] - offs[0];
      sq.widx = widx & ((1u << c) - 1u);
      ew += esc * oracle.answer(sq, out.query_tau);
    }
    double gq = 1.0;
    for (std::uint32_t g = 1; last - offs[0] + g <= span && last + g < n; ++g) {
      const double gm = mass * beta * gq;
      if (gm == 0.0) break;
      offs.push_back(last + g);
      walk(gm);
      offs.pop_back();
      gq *= q;
    }
  };

  for (std::uint32_t u = 0; u < n; ++u) {
    covered = 0.0;
    offs.assign(1, u);
    walk(1.0);
    covered_total += covered;
    tail_sum += std::max(0.0, 1.0 - covered);
  }

  double expect = beta * ew;
  if (widx == 0) expect += double(n) * (1.0 - beta);

  const double amp = std::pow(1.0 - delta2, -double(k));
  out.value = expect * amp;
  out.budget = amp * beta * (covered_total * out.query_tau + tail_sum);
  out.flagged = out.budget > pr.kappa;
  return out;
}

const SwEstimate& SwTable::at(std::uint32_t widx, std::size_t di) const {
  return cells.at(std::size_t(widx) * deltas.size() + di);
}

bool SwTable::any_flagged() const {
  for (const SwEstimate& e : cells)
    if (e.flagged) return true;
  return false;
}

SwTable sw_table(SqOracle& oracle, const AvgParams& pr,
                 const std::vector<double>& deltas) {
  if (deltas.empty()) throw std::invalid_argument("no grid rates requested");
  SwTable t;
  t.k = pr.k;
  t.deltas = deltas;
  t.cells.resize((std::size_t(1) << pr.k) * deltas.size());
  parallel_for_chunks(
      std::size_t(0), t.cells.size(),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
          const std::uint32_t w = std::uint32_t(c / deltas.size());
          const std::size_t di = c % deltas.size();
          t.cells[c] = estimate_SW(oracle, pr, w, deltas[di]);
        }
      },
      1);
  return t;
}

const char* to_string(AvgBackend b) {
  return b == AvgBackend::kExactMean ? "exact-mean-based"
                                     : "sw-consistency-greedy";
}

namespace {

AvgResult greedy_reconstruct(SqOracle& oracle, const AvgParams& pr) {
  const std::size_t n = oracle.source().size();
  if (n > 16)
    throw std::invalid_argument(
        "greedy backend enumerates completions; block too long");
  std::vector<double> grid(5);
  for (int i = 0; i < 5; ++i)
    grid[i] = pr.delta_at(std::floor(pr.L * double(i) / 4.0));
  const SwTable target = sw_table(oracle, pr, grid);

  const std::uint32_t npat = std::uint32_t(1) << pr.k;
  const auto full_score = [&](std::uint64_t cand) {
    double s = 0.0;
    const BitString c = BitString::from_word(cand, n);
    for (std::size_t di = 0; di < grid.size(); ++di) {
      const SubwordSignature sig =
          exact_subword_signature(c, ChannelParams::of(grid[di]), pr.k);
      const double amp = std::pow(1.0 - grid[di], -double(pr.k));
      for (std::uint32_t w = 0; w < npat; ++w) {
        const double diff =
            expected_kmer_count(sig, w) * amp - target.at(w, di).value;
        s += diff * diff;
      }
    }
    return s;
  };

  // A prefix is scored by its best exhaustive completion, so with faithful
  // estimates the true prefix keeps a near-zero score at every length and
  // the walk follows the global least-squares optimum.
  std::uint64_t prefix = 0;
  double final_score = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    double best[2];
    for (int b = 0; b < 2; ++b) {
      const std::uint64_t base = prefix | (std::uint64_t(b) << pos);
      const std::size_t rest = n - pos - 1;
      double bs = std::numeric_limits<double>::infinity();
      for (std::uint64_t tail = 0; tail < (std::uint64_t(1) << rest); ++tail)
        bs = std::min(bs, full_score(base | (tail << (pos + 1))));
      best[b] = bs;
    }
    const int pick = best[1] < best[0] ? 1 : 0;
    prefix |= std::uint64_t(pick) << pos;
    final_score = best[pick];
  }

  AvgResult res;
  res.x = BitString::from_word(prefix, n);
  res.residual = final_score;
  const double per_cell = 2.0 * pr.kappa;
  const double loud = per_cell * per_cell * double(target.cells.size());
  if (final_score > loud) {
    res.failed = true;
    res.note = "output statistics inconsistent with the estimates";
  }
  return res;
}

}  // namespace

AvgResult avg_reconstruct(SqOracle& oracle, const AvgParams& pr,
                          AvgBackend backend) {
  pr.validate();
  if (oracle.source().size() != pr.n)
    throw std::invalid_argument("oracle length does not match the schedule");

  if (backend == AvgBackend::kExactMean) {
    const MeanBasedResult mb = mean_based_reconstruct(oracle, pr.tau2 / 2.0);
    AvgResult res;
    res.x = mb.recovered;
    res.failed = mb.failed;
    res.residual = mb.worst_residual;
    if (mb.failed)
      res.note = "mean residual non-binary at position " +
                 std::to_string(mb.first_bad);
    return res;
  }
  return greedy_reconstruct(oracle, pr);
}

}  // namespace trsq
