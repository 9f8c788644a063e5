#include "trsq/sq_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <tuple>

#include <json.hpp>

#include "trsq/rng.hpp"

namespace trsq {

namespace {

std::uint64_t bits_of(double v) {
  std::uint64_t b;
  static_assert(sizeof b == sizeof v);
  std::memcpy(&b, &v, sizeof b);
  return b;
}

double double_of(std::uint64_t b) {
  double v;
  std::memcpy(&v, &b, sizeof v);
  return v;
}

// identity of a query: window placement, tail convention, exact table contents
std::uint64_t table_key(const LocalQuery& q) {
  std::uint64_t h = hash_combine(0x7172792d6b6579ULL, q.start);
  h = hash_combine(h, q.ell);
  h = hash_combine(h, q.strict_tail ? 1 : 0);
  for (double v : q.table) h = hash_combine(h, bits_of(v));
  return h;
}

std::uint64_t call_key(std::uint64_t tkey, double tau) {
  return hash_combine(tkey, bits_of(tau));
}

std::uint64_t sparse_key(const SparseLocalQuery& q) {
  std::uint64_t h = hash_combine(0x73702d71756572ULL, q.start);
  h = hash_combine(h, q.strict_tail ? 1 : 0);
  h = hash_combine(h, q.widx);
  for (std::uint32_t o : q.offsets) h = hash_combine(h, o);
  return h;
}

}  // namespace

void SparseLocalQuery::validate(std::size_t n) const {
  if (offsets.empty() || offsets.size() > 26)
    throw std::invalid_argument("sparse query support size out of range");
  if (offsets.front() != 0)
    throw std::invalid_argument("sparse query must anchor at its start");
  for (std::size_t m = 1; m < offsets.size(); ++m)
    if (offsets[m] <= offsets[m - 1])
      throw std::invalid_argument("sparse query offsets must increase");
  if (ell() > 26)
    throw std::invalid_argument("query window length out of range");
  if (start >= n) throw std::invalid_argument("query start past the string");
  if (offsets.size() < 32 && (widx >> offsets.size()) != 0)
    throw std::invalid_argument("pattern wider than the query support");
}

LocalQuery LocalQuery::constant(std::size_t start, unsigned ell, double value) {
  LocalQuery q;
  q.start = start;
  q.ell = ell;
  q.table.assign(std::size_t(1) << ell, value);
  return q;
}

LocalQuery LocalQuery::dictator(std::size_t start, unsigned ell,
                                unsigned alpha) {
  LocalQuery q;
  q.start = start;
  q.ell = ell;
  q.table.assign(std::size_t(1) << ell, 0.0);
  for (std::size_t w = 0; w < q.table.size(); ++w)
    if (pattern_bit(unsigned(w), alpha)) q.table[w] = 1.0;
  return q;
}

LocalQuery LocalQuery::pattern_indicator(std::size_t start, unsigned ell,
                                         unsigned widx) {
  LocalQuery q;
  q.start = start;
  q.ell = ell;
  q.table.assign(std::size_t(1) << ell, 0.0);
  q.table.at(widx) = 1.0;
  return q;
}

void LocalQuery::validate(std::size_t n) const {
  if (ell < 1 || ell > 26)
    throw std::invalid_argument("query window length out of range");
  if (table.size() != (std::size_t(1) << ell))
    throw std::invalid_argument("query table size mismatch");
  if (start >= n) throw std::invalid_argument("query start past the string");
  for (double v : table)
    if (!(std::abs(v) <= 1.0))
      throw std::invalid_argument("query values must lie in [-1, 1]");
}

const char* to_string(OracleBackend b) {
  return b == OracleBackend::kExact ? "exact" : "monte-carlo";
}

const char* to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::kNone: return "none";
    case NoiseMode::kUniformRandom: return "uniform-random";
    case NoiseMode::kAdversarialRounding: return "adversarial-rounding";
  }
  return "?";
}

SqOracle::SqOracle(OracleConfig cfg, BitString x, ChannelParams ch)
    : cfg_(cfg), x_(std::move(x)), ch_(ch) {
  if (!(cfg_.tau0 > 0.0))
    throw std::invalid_argument("tolerance floor must be positive");
  min_tau_bits_.store(bits_of(std::numeric_limits<double>::infinity()),
                      std::memory_order_relaxed);
}

const SubwordSignature& SqOracle::signature_for(unsigned ell) const {
  std::lock_guard<std::mutex> lk(sig_mu_);
  auto it = sig_cache_.find(ell);
  if (it == sig_cache_.end())
    it = sig_cache_.emplace(ell, exact_subword_signature(x_, ch_, ell)).first;
  return it->second;
}

double SqOracle::exact_value(const LocalQuery& q) const {
  q.validate(x_.size());
  if (q.strict_tail) {
    // no shared table for the strict convention; sum the per-pattern joints
    std::vector<std::uint32_t> pos(q.ell);
    for (unsigned k = 0; k < q.ell; ++k)
      pos[k] = std::uint32_t(q.start + k);
    double p = 0.0;
    for (std::size_t w = 0; w < q.table.size(); ++w) {
      if (q.table[w] == 0.0) continue;
      p += q.table[w] * joint_trace_match(x_, ch_, pos, unsigned(w),
                                          TraceTail::kStrictLength);
    }
    return p;
  }
  const SubwordSignature& sig = signature_for(q.ell);
  double p = 0.0;
  for (std::size_t w = 0; w < q.table.size(); ++w)
    p += sig.at(q.start, w) * q.table[w];
  return p;
}

double SqOracle::backend_estimate(const LocalQuery& q, std::uint64_t tkey) {
  if (cfg_.backend == OracleBackend::kExact) return exact_value(q);
  if (cfg_.mc_samples == 0)
    throw std::invalid_argument("sample budget must be positive");
  // aggregate only; individual traces stay private to this loop
  Rng rng(mix64(hash_combine(cfg_.seed ^ 0x6d632d73616d70ULL, tkey)));
  double acc = 0.0;
  for (std::size_t s = 0; s < cfg_.mc_samples; ++s) {
    const Trace t = sample_trace(x_, ch_, rng);
    if (q.strict_tail && t.bits.size() < q.start + q.ell) continue;
    unsigned widx = 0;
    for (unsigned k = 0; k < q.ell; ++k) {
      const std::size_t pos = q.start + k;
      if (pos < t.bits.size() && t.bits[pos]) widx |= 1u << k;
    }
    acc += q.table[widx];
  }
  return acc / double(cfg_.mc_samples);
}

double SqOracle::answer(const LocalQuery& q, double tau) {
  q.validate(x_.size());
  if (!(tau > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg_.enforce_floor && tau < cfg_.tau0)
    throw ToleranceRefused("tolerance below the configured floor");

  const std::uint64_t tkey = table_key(q);
  const double est = backend_estimate(q, tkey);

  bool single = false;
  unsigned swidx = 0;
  {
    int ones = 0;
    bool clean = true;
    for (std::size_t w = 0; w < q.table.size(); ++w) {
      if (q.table[w] == 1.0) {
        ++ones;
        swidx = unsigned(w);
      } else if (q.table[w] != 0.0) {
        clean = false;
      }
    }
    single = clean && ones == 1;
  }
  return finish_answer(est, tkey, tau, q.start, q.ell, single, swidx);
}

double SqOracle::answer(const SparseLocalQuery& q, double tau) {
  q.validate(x_.size());
  if (!(tau > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg_.enforce_floor && tau < cfg_.tau0)
    throw ToleranceRefused("tolerance below the configured floor");

  const std::uint64_t tkey = sparse_key(q);
  const double est = backend_estimate(q, tkey);
  return finish_answer(est, tkey, tau, q.start, q.ell(), false, 0);
}

double SqOracle::finish_answer(double est, std::uint64_t tkey, double tau,
                               std::size_t start, unsigned ell, bool single,
                               unsigned swidx) {
  double out = est;
  switch (cfg_.noise) {
    case NoiseMode::kNone:
      break;
    case NoiseMode::kUniformRandom: {
      const std::uint64_t k =
          mix64(hash_combine(cfg_.seed ^ 0x756e69666f726dULL,
                             call_key(tkey, tau)));
      const double u = double(k >> 11) * 0x1.0p-53;
      out = est + tau * (2.0 * u - 1.0);
      break;
    }
    case NoiseMode::kAdversarialRounding: {
      const double pulled =
          est + std::clamp(cfg_.confusion_target - est, -tau, tau);
      if (cfg_.adaptive_adversary) {
        std::lock_guard<std::mutex> lk(memo_mu_);
        auto it = committed_.find(tkey);
        if (it == committed_.end()) {
          out = pulled;
          committed_.emplace(tkey, out);
        } else {
          // stay with the earlier answer as far as the tolerance allows, and
          // remember where we actually ended up
          out = std::clamp(it->second, est - tau, est + tau);
          it->second = out;
        }
      } else {
        out = pulled;
      }
      break;
    }
  }

  count_.fetch_add(1, std::memory_order_relaxed);
  std::uint64_t tb = bits_of(tau);
  std::uint64_t cur = min_tau_bits_.load(std::memory_order_relaxed);
  while (tb < cur &&
         !min_tau_bits_.compare_exchange_weak(cur, tb,
                                              std::memory_order_relaxed)) {
  }
  per_ell_[ell].fetch_add(1, std::memory_order_relaxed);

  {
    std::lock_guard<std::mutex> lk(rec_mu_);
    records_.push_back(Record{start, ell, tkey, single, swidx, tau, out});
  }
  return out;
}

double SqOracle::exact_value(const SparseLocalQuery& q) const {
  q.validate(x_.size());
  std::vector<std::uint32_t> pos(q.offsets.size());
  for (std::size_t m = 0; m < pos.size(); ++m)
    pos[m] = std::uint32_t(q.start) + q.offsets[m];
  return joint_trace_match(x_, ch_, pos, q.widx,
                           q.strict_tail ? TraceTail::kStrictLength
                                         : TraceTail::kZeroPadded);
}

double SqOracle::backend_estimate(const SparseLocalQuery& q,
                                  std::uint64_t tkey) {
  if (cfg_.backend == OracleBackend::kExact) return exact_value(q);
  if (cfg_.mc_samples == 0)
    throw std::invalid_argument("sample budget must be positive");
  Rng rng(mix64(hash_combine(cfg_.seed ^ 0x6d632d73616d70ULL, tkey)));
  double acc = 0.0;
  for (std::size_t s = 0; s < cfg_.mc_samples; ++s) {
    const Trace t = sample_trace(x_, ch_, rng);
    if (q.strict_tail && t.bits.size() < q.start + q.ell()) continue;
    unsigned got = 0;
    for (std::size_t m = 0; m < q.offsets.size(); ++m) {
      const std::size_t pos = q.start + q.offsets[m];
      if (pos < t.bits.size() && t.bits[pos]) got |= 1u << m;
    }
    if (got == q.widx) acc += 1.0;
  }
  return acc / double(cfg_.mc_samples);
}

LedgerSnapshot SqOracle::ledger() const {
  LedgerSnapshot s;
  s.count = count_.load(std::memory_order_relaxed);
  s.min_tau = double_of(min_tau_bits_.load(std::memory_order_relaxed));
  for (unsigned e = 1; e < per_ell_.size(); ++e) {
    const auto c = per_ell_[e].load(std::memory_order_relaxed);
    if (c) s.per_ell[e] = c;
  }
  return s;
}

std::string SqOracle::log_json() const {
  std::vector<Record> recs;
  {
    std::lock_guard<std::mutex> lk(rec_mu_);
    recs = records_;
  }
  std::sort(recs.begin(), recs.end(), [](const Record& a, const Record& b) {
    return std::tie(a.start, a.ell, a.key, a.tau, a.answer) <
           std::tie(b.start, b.ell, b.key, b.tau, b.answer);
  });
  std::string out;
  for (const Record& r : recs) {
    nlohmann::ordered_json j;
    j["i"] = r.start;
    if (r.single_pattern) {
      j["w"] = pattern_str(r.widx, r.ell);
    } else {
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(r.key));
      j["table_hash"] = buf;
    }
    j["tau"] = r.tau;
    j["answer"] = r.answer;
    j["mode"] = to_string(cfg_.noise);
    j["seed"] = cfg_.seed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

SubwordDecomposition reduce_to_subwords(const LocalQuery& q, double tau0) {
  if (!(tau0 > 0.0)) throw std::invalid_argument("tolerance must be positive");
  SubwordDecomposition d;
  d.start = q.start;
  d.ell = q.ell;
  d.per_query_tau = tau0 / double(std::size_t(1) << q.ell);
  d.weights = q.table;
  return d;
}

double answer_via_subwords(SqOracle& oracle, const LocalQuery& q, double tau0) {
  const SubwordDecomposition d = reduce_to_subwords(q, tau0);
  double acc = 0.0;
  for (std::size_t w = 0; w < d.weights.size(); ++w) {
    const auto sub =
        LocalQuery::pattern_indicator(d.start, d.ell, unsigned(w));
    acc += d.weights[w] * oracle.answer(sub, d.per_query_tau);
  }
  return acc;
}

}  // namespace trsq
