#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "trsq/bitstring.hpp"
#include "trsq/channel.hpp"

namespace trsq {

// A bounded function of ell consecutive trace positions starting at `start`.
// By default positions past the end of the trace read as 0, matching the
// channel's zero-suffix convention; with strict_tail set the query evaluates
// to 0 on any trace too short to cover the whole window, which is what the
// polynomial-identity machinery needs.
struct LocalQuery {
  std::size_t start = 0;
  unsigned ell = 1;
  std::vector<double> table;  // indexed by pattern, size 1 << ell, |value| <= 1
  bool strict_tail = false;

  static LocalQuery constant(std::size_t start, unsigned ell, double value);
  // indicator of window bit alpha reading 1
  static LocalQuery dictator(std::size_t start, unsigned ell, unsigned alpha);
  // indicator of the window spelling exactly pattern widx
  static LocalQuery pattern_indicator(std::size_t start, unsigned ell,
                                      unsigned widx);

  void validate(std::size_t n) const;
};

// A pattern indicator supported on a sparse subset of a window: value 1
// exactly when the trace reads bit m of widx at start + offsets[m] for every
// m. Locality is counted to the last offset, so this is an
// (offsets.back()+1)-local query whose dense table would be exponentially
// large; only the sparse form crosses the interface.
struct SparseLocalQuery {
  std::size_t start = 0;
  std::vector<std::uint32_t> offsets;  // strictly increasing, offsets[0] == 0
  unsigned widx = 0;                   // bit m belongs to offsets[m]
  bool strict_tail = false;

  unsigned ell() const {
    return offsets.empty() ? 0u : offsets.back() + 1u;
  }

  void validate(std::size_t n) const;
};

enum class OracleBackend { kExact, kMonteCarlo };
enum class NoiseMode { kNone, kUniformRandom, kAdversarialRounding };

const char* to_string(OracleBackend b);
const char* to_string(NoiseMode m);

struct OracleConfig {
  OracleBackend backend = OracleBackend::kExact;
  NoiseMode noise = NoiseMode::kUniformRandom;
  double tau0 = 1e-3;        // tolerance floor, enforced only when asked
  bool enforce_floor = false;
  std::uint64_t seed = 0;
  std::size_t mc_samples = 100000;  // per-query budget of the sampling backend
  // adversarial-rounding pulls every answer toward this value, moving at most
  // tau away from the truth
  double confusion_target = 0.5;
  // stateful adversary: a repeated query is answered as close to the earlier
  // answer as the new tolerance permits, instead of being re-derived from the
  // confusion target
  bool adaptive_adversary = false;
};

struct ToleranceRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LedgerSnapshot {
  std::uint64_t count = 0;
  double min_tau = std::numeric_limits<double>::infinity();
  std::map<unsigned, std::uint64_t> per_ell;
};

// Answers local queries about traces of one source string within a stated
// tolerance. Traces themselves never cross this interface; the sampling
// backend aggregates internally. Noise is a deterministic function of
// (seed, query, tolerance), so repeated identical queries return identical
// answers and call order does not matter.
class SqOracle {
 public:
  SqOracle(OracleConfig cfg, BitString x, ChannelParams ch);

  SqOracle(const SqOracle&) = delete;
  SqOracle& operator=(const SqOracle&) = delete;

  // value within ±tau of the true query probability
  double answer(const LocalQuery& q, double tau);
  double answer(const SparseLocalQuery& q, double tau);

  // the true value, from the exact table regardless of configured backend
  double exact_value(const LocalQuery& q) const;
  double exact_value(const SparseLocalQuery& q) const;

  const OracleConfig& config() const { return cfg_; }
  const BitString& source() const { return x_; }
  const ChannelParams& channel() const { return ch_; }

  LedgerSnapshot ledger() const;
  // one JSON record per answered query, canonically ordered so logs come out
  // byte-identical regardless of call interleaving
  std::string log_json() const;

 private:
  struct Record {
    std::size_t start;
    unsigned ell;
    std::uint64_t key;
    bool single_pattern;
    unsigned widx;
    double tau;
    double answer;
  };

  double backend_estimate(const LocalQuery& q, std::uint64_t tkey);
  double backend_estimate(const SparseLocalQuery& q, std::uint64_t tkey);
  double finish_answer(double est, std::uint64_t tkey, double tau,
                       std::size_t start, unsigned ell, bool single,
                       unsigned swidx);
  const SubwordSignature& signature_for(unsigned ell) const;

  OracleConfig cfg_;
  BitString x_;
  ChannelParams ch_;

  mutable std::mutex sig_mu_;
  mutable std::map<unsigned, SubwordSignature> sig_cache_;

  std::mutex memo_mu_;
  std::map<std::uint64_t, double> committed_;

  std::atomic<std::uint64_t> count_{0};
  std::atomic<std::uint64_t> min_tau_bits_{0};
  std::array<std::atomic<std::uint64_t>, 27> per_ell_{};
  mutable std::mutex rec_mu_;
  std::vector<Record> records_;
};

// The 2^ell subword queries over a query's window, each to be asked at
// tolerance tau0 / 2^ell; recombining with the weights reproduces the query
// value to within tau0.
struct SubwordDecomposition {
  std::size_t start = 0;
  unsigned ell = 1;
  double per_query_tau = 0.0;
  std::vector<double> weights;  // one per pattern
};

SubwordDecomposition reduce_to_subwords(const LocalQuery& q, double tau0);

// asks all 2^ell subword queries through the oracle and recombines
double answer_via_subwords(SqOracle& oracle, const LocalQuery& q, double tau0);

}  // namespace trsq
