// trsq: batch experiment driver over the core library. Every run writes one
// self-describing artifact (JSON or CSV) whose bytes depend only on the
// configuration and seed, never on wall clock or worker count.
//
// Exit codes: 0 clean, 2 at least one flagged/ambiguous result, 3 bad config.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "trsq/avg_case.hpp"
#include "trsq/bitstring.hpp"
#include "trsq/channel.hpp"
#include "trsq/degrade.hpp"
#include "trsq/lower_bounds.hpp"
#include "trsq/parallel.hpp"
#include "trsq/rng.hpp"
#include "trsq/signature_io.hpp"
#include "trsq/sq_oracle.hpp"
#include "trsq/version.hpp"
#include "trsq/worst_case.hpp"

using json = nlohmann::ordered_json;
using namespace trsq;

namespace {

constexpr int kExitFlagged = 2;
constexpr int kExitConfig = 3;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& out, const std::string& content) {
  if (out == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  write_text_file(out, content);
}

json artifact(const char* command, json config, json result) {
  json j;
  j["tool"] = "trsq";
  j["version"] = std::string(kVersion);
  j["precision"] = std::string(kExactBackend);
  j["command"] = command;
  j["config"] = std::move(config);
  j["result"] = std::move(result);
  return j;
}

void emit_json(const std::string& out, const json& j) {
  emit(out, j.dump(2) + "\n");
}

// CSV artifacts carry the same metadata as leading comment lines, so a table
// never loses track of the run that produced it.
std::string csv_header(const char* command, const json& config) {
  std::string s;
  s += "# tool=trsq version=" + std::string(kVersion) +
       " precision=" + std::string(kExactBackend) + " command=" + command +
       "\n";
  s += "# config: " + config.dump() + "\n";
  return s;
}

NoiseMode parse_noise(const std::string& s) {
  if (s == "none") return NoiseMode::kNone;
  if (s == "uniform") return NoiseMode::kUniformRandom;
  if (s == "adversarial") return NoiseMode::kAdversarialRounding;
  throw CLI::ValidationError("--noise", "must be none, uniform or adversarial");
}

BitString parse_bits(const std::string& s) {
  for (char c : s)
    if (c != '0' && c != '1')
      throw CLI::ValidationError("--x", "must be a nonempty 0/1 string");
  if (s.empty()) throw CLI::ValidationError("--x", "must be nonempty");
  return BitString::from_string(s);
}

// x from --x when given, else n random bits on a child stream of the seed
BitString pick_source(const std::string& xs, std::size_t n, std::uint64_t seed,
                      std::uint64_t label) {
  if (!xs.empty()) return parse_bits(xs);
  if (n == 0)
    throw CLI::ValidationError("--n", "required when --x is not given");
  Rng rng(hash_combine(seed, label));
  return BitString::random(n, rng);
}

// residual test stays meaningful at every back-substitution step
double default_mean_tau(std::size_t n, const ChannelParams& ch) {
  return 0.2 * std::pow(ch.rho(), double(n));
}

struct CommonOpts {
  std::string delta = "0.5";
  std::uint64_t seed = 1;
  std::string out = "-";
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--delta", c.delta, "deletion rate, decimal in (0,1)")
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "master RNG seed")->capture_default_str();
  sub->add_option("--out", c.out, "output path, - for stdout")
      ->capture_default_str();
}

json schedule_json(const AvgParams& pr) {
  json j;
  j["k"] = pr.k;
  j["kappa"] = pr.kappa;
  j["tau2"] = pr.tau2;
  j["d"] = pr.d;
  j["Delta"] = pr.Delta;
  j["L"] = pr.L;
  j["ell"] = pr.ell;
  return j;
}

// ---------------------------------------------------------------- stats ----

struct StatsOpts {
  CommonOpts c;
  std::string x;
  std::size_t n = 0;
  unsigned ell = 2;
  std::string format = "json";
};

int run_stats(const StatsOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  const BitString x = pick_source(o.x, o.n, o.c.seed, 1);
  const SubwordSignature sig = exact_subword_signature(x, ch, o.ell);

  json config;
  config["x"] = x.str();
  config["delta"] = o.c.delta;
  config["ell"] = o.ell;
  config["seed"] = o.c.seed;
  config["format"] = o.format;

  if (o.format == "csv") {
    emit(o.c.out, csv_header("stats", config) + signature_to_csv(sig));
    return 0;
  }
  if (o.format != "json")
    throw CLI::ValidationError("--format", "must be json or csv");
  emit_json(o.c.out,
            artifact("stats", config, json::parse(signature_to_json(sig))));
  return 0;
}

// ----------------------------------------------------- reconstruct-mean ----

struct MeanOpts {
  CommonOpts c;
  std::size_t n = 8;
  bool exhaustive = false;
  bool rational = false;
  std::size_t trials = 100;
  std::string noise = "none";
  double tau = 0.0;  // 0 = derived from (n, delta)
};

int run_mean(const MeanOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  if (o.n == 0 || o.n > 24)
    throw CLI::ValidationError("--n", "must lie in [1, 24]");
  if (o.exhaustive && o.n > 16)
    throw CLI::ValidationError("--exhaustive", "needs n <= 16");
  if (o.rational && parse_noise(o.noise) != NoiseMode::kNone)
    throw CLI::ValidationError("--rational", "needs --noise none");
  const double tau = o.tau > 0.0 ? o.tau : default_mean_tau(o.n, ch);

  json config;
  config["n"] = o.n;
  config["delta"] = o.c.delta;
  config["noise"] = o.noise;
  config["tau"] = tau;
  config["seed"] = o.c.seed;
  config["exhaustive"] = o.exhaustive;
  config["rational"] = o.rational;
  if (!o.exhaustive) config["trials"] = o.trials;

  const std::size_t total =
      o.exhaustive ? (std::size_t(1) << o.n) : o.trials;
  std::size_t recovered = 0;
  json failures = json::array();
  for (std::size_t t = 0; t < total; ++t) {
    BitString x;
    if (o.exhaustive) {
      x = BitString::from_word(std::uint64_t(t), o.n);
    } else {
      Rng rng(hash_combine(o.c.seed, t));
      x = BitString::random(o.n, rng);
    }
    bool ok;
    if (o.rational) {
      const auto p = exact_one_bit_stats_rational(x, ch);
      ok = mean_based_invert_rational(p, std::uint32_t(o.n), ch) == x;
      if (!ok && failures.size() < 10)
        failures.push_back({{"x", x.str()}});
    } else {
      OracleConfig cfg;
      cfg.backend = OracleBackend::kExact;
      cfg.noise = parse_noise(o.noise);
      cfg.seed = hash_combine(o.c.seed, 0x6d65616eULL + t);
      SqOracle oracle(cfg, x, ch);
      const MeanBasedResult r = mean_based_reconstruct(oracle, tau);
      ok = !r.failed && r.recovered == x;
      if (!ok && failures.size() < 10)
        failures.push_back({{"x", x.str()},
                            {"failed", r.failed},
                            {"first_bad", r.first_bad},
                            {"worst_residual", r.worst_residual}});
    }
    recovered += ok;
  }

  json result;
  result["total"] = total;
  result["recovered"] = recovered;
  result["failures"] = std::move(failures);
  emit_json(o.c.out, artifact("reconstruct-mean", config, result));
  return recovered == total ? 0 : kExitFlagged;
}

// ---------------------------------------------------- reconstruct-worst ----

struct WorstOpts {
  CommonOpts c;
  std::string x;
  std::size_t n = 0;
  std::size_t trials = 1;
  std::string noise = "none";
  double tau0 = -1.0;  // < 0 = keep the length-derived default
};

int run_worst(const WorstOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  const std::size_t n = o.x.empty() ? o.n : o.x.size();
  if (n == 0 || n > 14)
    throw CLI::ValidationError("--n", "must lie in [1, 14]");
  WorstCaseParams params = WorstCaseParams::for_length(std::uint32_t(n));
  if (o.tau0 >= 0.0) params.tau0 = o.tau0;
  params.validate();

  json config;
  config["n"] = n;
  config["delta"] = o.c.delta;
  config["noise"] = o.noise;
  config["ell"] = params.ell;
  config["d0"] = params.d0;
  config["tau0"] = params.tau0;
  config["seed"] = o.c.seed;
  const std::size_t trials = o.x.empty() ? o.trials : 1;
  config["trials"] = trials;
  if (!o.x.empty()) config["x"] = o.x;

  std::size_t recovered = 0, ambiguous = 0;
  json runs = json::array();
  for (std::size_t t = 0; t < trials; ++t) {
    const BitString x = pick_source(o.x, n, o.c.seed, 0x776f727374ULL + t);
    OracleConfig cfg;
    cfg.backend = OracleBackend::kExact;
    cfg.noise = parse_noise(o.noise);
    cfg.seed = hash_combine(o.c.seed, 0x77ULL + t);
    SqOracle oracle(cfg, x, ch);
    const PairwiseResult r = pairwise_reconstruct(oracle, params);
    recovered += !r.ambiguous && r.recovered == x;
    ambiguous += r.ambiguous;
    if (runs.size() < 10)
      runs.push_back({{"x", x.str()},
                      {"recovered", (!r.ambiguous && r.recovered == x)},
                      {"ambiguous", r.ambiguous},
                      {"rounds", r.rounds},
                      {"min_gap", r.min_gap},
                      {"queries", r.queries}});
  }

  json result;
  result["total"] = trials;
  result["recovered"] = recovered;
  result["ambiguous"] = ambiguous;
  result["runs"] = std::move(runs);
  emit_json(o.c.out, artifact("reconstruct-worst", config, result));
  return ambiguous == 0 && recovered == trials ? 0 : kExitFlagged;
}

// ------------------------------------------------------ reconstruct-avg ----

struct AvgOpts {
  CommonOpts c;
  std::size_t n = 12;
  double eta = 0.01;
  std::string backend = "mean";
  std::size_t trials = 20;
  std::string noise = "none";
  AvgMultipliers mult;
};

void add_multipliers(CLI::App* sub, AvgMultipliers& m) {
  sub->add_option("--c-k", m.c_k, "pattern length multiplier")
      ->capture_default_str();
  sub->add_option("--big-c", m.big_c, "degree schedule base")
      ->capture_default_str();
  sub->add_option("--c-kap", m.c_kap, "accuracy exponent multiplier")
      ->capture_default_str();
  sub->add_option("--c-ell-k", m.c_ell_k, "locality term on k")
      ->capture_default_str();
  sub->add_option("--c-ell-n", m.c_ell_n, "locality term on log n")
      ->capture_default_str();
}

int run_avg(const AvgOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  AvgBackend backend;
  if (o.backend == "mean") {
    backend = AvgBackend::kExactMean;
  } else if (o.backend == "greedy") {
    backend = AvgBackend::kSwGreedy;
  } else {
    throw CLI::ValidationError("--backend", "must be mean or greedy");
  }
  const AvgParams pr = avg_params(std::uint32_t(o.n), o.eta, ch, o.mult);

  json config;
  config["n"] = o.n;
  config["delta"] = o.c.delta;
  config["eta"] = o.eta;
  config["backend"] = o.backend;
  config["noise"] = o.noise;
  config["trials"] = o.trials;
  config["seed"] = o.c.seed;
  config["schedule"] = schedule_json(pr);

  std::size_t recovered = 0, flagged = 0;
  double worst_residual = 0.0;
  json failures = json::array();
  for (std::size_t t = 0; t < o.trials; ++t) {
    Rng rng(hash_combine(o.c.seed, 0x617667ULL + t));
    const BitString x = BitString::random(o.n, rng);
    OracleConfig cfg;
    cfg.backend = OracleBackend::kExact;
    cfg.noise = parse_noise(o.noise);
    cfg.seed = hash_combine(o.c.seed, t);
    SqOracle oracle(cfg, x, ch);
    const AvgResult r = avg_reconstruct(oracle, pr, backend);
    recovered += !r.failed && r.x == x;
    flagged += r.failed;
    worst_residual = std::max(worst_residual, r.residual);
    if (r.failed && failures.size() < 10)
      failures.push_back({{"x", x.str()}, {"note", r.note}});
  }

  json result;
  result["total"] = o.trials;
  result["recovered"] = recovered;
  result["flagged"] = flagged;
  result["worst_residual"] = worst_residual;
  result["failures"] = std::move(failures);
  emit_json(o.c.out, artifact("reconstruct-avg", config, result));
  return flagged == 0 ? 0 : kExitFlagged;
}

// ------------------------------------------------------------- sw-table ----

struct SwOpts {
  CommonOpts c;
  std::string x;
  std::size_t n = 0;
  double eta = 0.01;
  unsigned grid_points = 5;
  std::string format = "csv";
  AvgMultipliers mult;
};

int run_sw(const SwOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  const BitString x = pick_source(o.x, o.n, o.c.seed, 2);
  const AvgParams pr = avg_params(std::uint32_t(x.size()), o.eta, ch, o.mult);
  if (o.grid_points < 2 || o.grid_points > 64)
    throw CLI::ValidationError("--grid-points", "must lie in [2, 64]");

  std::vector<double> deltas(o.grid_points);
  for (unsigned i = 0; i < o.grid_points; ++i)
    deltas[i] = pr.delta_at(
        std::floor(pr.L * double(i) / double(o.grid_points - 1)));

  OracleConfig cfg;
  cfg.backend = OracleBackend::kExact;
  cfg.noise = NoiseMode::kNone;
  cfg.seed = o.c.seed;
  SqOracle oracle(cfg, x, ch);
  const SwTable table = sw_table(oracle, pr, deltas);

  json config;
  config["x"] = x.str();
  config["delta"] = o.c.delta;
  config["eta"] = o.eta;
  config["grid_points"] = o.grid_points;
  config["seed"] = o.c.seed;
  config["schedule"] = schedule_json(pr);

  if (o.format == "json") {
    json rows = json::array();
    for (std::uint32_t w = 0; w < (std::uint32_t(1) << pr.k); ++w)
      for (std::size_t di = 0; di < deltas.size(); ++di) {
        const SwEstimate& e = table.at(w, di);
        rows.push_back({{"w", pattern_str(w, pr.k)},
                        {"delta2", deltas[di]},
                        {"estimate", e.value},
                        {"budget", e.budget},
                        {"flagged", e.flagged}});
      }
    emit_json(o.c.out, artifact("sw-table", config, {{"cells", rows}}));
  } else if (o.format == "csv") {
    std::string s = csv_header("sw-table", config);
    s += "w,delta2,estimate,budget,flagged\n";
    for (std::uint32_t w = 0; w < (std::uint32_t(1) << pr.k); ++w)
      for (std::size_t di = 0; di < deltas.size(); ++di) {
        const SwEstimate& e = table.at(w, di);
        s += pattern_str(w, pr.k) + "," + fmt(deltas[di]) + "," +
             fmt(e.value) + "," + fmt(e.budget) + "," +
             (e.flagged ? "1" : "0") + "\n";
      }
    emit(o.c.out, s);
  } else {
    throw CLI::ValidationError("--format", "must be json or csv");
  }
  return table.any_flagged() ? kExitFlagged : 0;
}

// -------------------------------------------------------------- degrade ----

struct DegradeOpts {
  CommonOpts c;
  std::string x;
  std::size_t n = 0;
  std::string delta2 = "0.75";
  unsigned ell_out = 2;
  double tau2 = 1e-6;
  unsigned start = 0;
};

int run_degrade(const DegradeOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  const ChannelParams ch2 = ChannelParams::from_decimal(o.delta2);
  const BitString x = pick_source(o.x, o.n, o.c.seed, 3);

  const double beta_r = (1.0 - ch2.delta()) / (1.0 - ch.delta());
  if (!(beta_r > 0.0 && beta_r <= 1.0))
    throw CLI::ValidationError("--delta2", "must be at least --delta");
  std::uint32_t ell_in = 1;
  if (o.ell_out >= 2) {
    const std::uint32_t span =
        span_bound_for(beta_r, o.ell_out, o.tau2 / 2.0);
    const std::uint32_t reach = std::min<std::uint32_t>(
        span, x.size() > o.start ? std::uint32_t(x.size()) - 1 - o.start : 0);
    ell_in = reach + 1;
  }
  const DegradeSpec spec =
      DegradeSpec::make(ch.delta(), ch2.delta(), ell_in, o.ell_out, o.tau2);
  const SubwordSignature sig = exact_subword_signature(x, ch, ell_in);
  const DegradeResult r = degrade_subword_stats(sig, spec, o.start);

  json config;
  config["x"] = x.str();
  config["delta"] = o.c.delta;
  config["delta2"] = o.delta2;
  config["ell_out"] = o.ell_out;
  config["ell_in"] = ell_in;
  config["tau2"] = o.tau2;
  config["start"] = o.start;
  config["seed"] = o.c.seed;

  json result;
  json entries = json::array();
  for (std::size_t widx = 0; widx < r.phat.size(); ++widx)
    entries.push_back({{"w", pattern_str(unsigned(widx), o.ell_out)},
                       {"p", r.phat[widx]}});
  result["entries"] = std::move(entries);
  result["tail_mass"] = r.tail_mass;
  result["input_tol"] = r.input_tol;
  result["budget"] = r.budget();
  if (x.size() <= 12) {
    result["tv_against_direct"] =
        compose_channels_check(x, ch.delta(), ch2.delta(), o.ell_out);
  }
  emit_json(o.c.out, artifact("degrade", config, result));
  return 0;
}

// ----------------------------------------------------------- lowerbound ----

struct LowerOpts {
  CommonOpts c;
  std::size_t n = 32;
  unsigned ell = 4;
  std::size_t trials = 100;
};

int run_lower(const LowerOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  if (o.n < 2 || o.n % 2 != 0)
    throw CLI::ValidationError("--n", "must be even and at least 2");
  if (o.ell < 1 || o.ell > 16 || o.ell > o.n)
    throw CLI::ValidationError("--ell", "must lie in [1, min(n, 16)]");

  json config;
  config["n"] = o.n;
  config["delta"] = o.c.delta;
  config["ell"] = o.ell;
  config["trials"] = o.trials;
  config["seed"] = o.c.seed;

  double worst_gap = 0.0, worst_bound = 0.0, worst_scaled = 0.0;
  std::size_t violations = 0;
  for (std::size_t t = 0; t < o.trials; ++t) {
    Rng rng(hash_combine(o.c.seed, 0x6c62ULL + t));
    const BitString x = BitString::random(o.n, rng);
    JuntaQuery q;
    // sorted distinct positions, then a bounded random table
    std::vector<std::uint32_t> all(o.n);
    for (std::size_t i = 0; i < o.n; ++i) all[i] = std::uint32_t(i);
    for (unsigned i = 0; i < o.ell; ++i) {
      const std::size_t j = i + std::size_t(rng.below(o.n - i));
      std::swap(all[i], all[j]);
    }
    q.positions.assign(all.begin(), all.begin() + o.ell);
    std::sort(q.positions.begin(), q.positions.end());
    q.table.resize(std::size_t(1) << o.ell);
    for (auto& v : q.table) v = rng.uniform(-1.0, 1.0);
    const MiddleBitResult r = middle_bit_gap(x, ch, q);
    worst_gap = std::max(worst_gap, r.gap);
    worst_bound = std::max(worst_bound, r.bound);
    worst_scaled = std::max(
        worst_scaled, r.gap * std::sqrt(double(o.n)) / double(o.ell));
    violations += r.gap > r.bound + 1e-12;
  }

  json result;
  result["worst_gap"] = worst_gap;
  result["worst_bound"] = worst_bound;
  result["worst_gap_scaled"] = worst_scaled;  // gap * sqrt(n) / ell
  result["violations"] = violations;
  emit_json(o.c.out, artifact("lowerbound", config, result));
  return violations == 0 ? 0 : kExitFlagged;
}

// -------------------------------------------------------------- certify ----

struct CertifyOpts {
  CommonOpts c;
  std::string a, a2;
  std::size_t n = 32;
  unsigned ell = 3;
};

int run_certify(const CertifyOpts& o) {
  const ChannelParams ch = ChannelParams::from_decimal(o.c.delta);
  if (o.a.empty() != o.a2.empty())
    throw CLI::ValidationError("--a", "give both --a and --a2 or neither");

  json config;
  config["delta"] = o.c.delta;
  config["ell"] = o.ell;
  config["seed"] = o.c.seed;

  BitString a, a2;
  json construction;
  if (!o.a.empty()) {
    a = parse_bits(o.a);
    a2 = parse_bits(o.a2);
    config["a"] = o.a;
    config["a2"] = o.a2;
  } else {
    config["n"] = o.n;
    const HardPair hp = construct_hard_pair(std::uint32_t(o.n), ch);
    a = hp.a;
    a2 = hp.a2;
    construction["t"] = hp.t;
    construction["radius"] = hp.radius;
    construction["objective"] = hp.objective;
  }

  const PairCertificate cert = certify_pair(a, a2, ch, o.ell);
  json result;
  result["a"] = a.str();
  result["a2"] = a2.str();
  if (!construction.empty()) result["construction"] = construction;
  result["one_bit_gap"] = cert.one_bit_gap.str();
  result["one_bit_gap_double"] = to_double(cert.one_bit_gap);
  result["signature_gap"] = cert.signature_gap.str();
  result["gap_heavy"] = cert.gap_heavy.str();
  result["gap_one"] = cert.gap_one.str();
  result["gap_zero"] = cert.gap_zero.str();
  result["heavy_mass"] = cert.heavy_mass.str();
  result["weight1_bound"] = cert.weight1_bound.str();
  result["zero_bound"] = cert.zero_bound.str();
  result["chain_ok"] = cert.chain_ok;
  emit_json(o.c.out, artifact("certify", config, result));
  return cert.chain_ok ? 0 : kExitFlagged;
}

// ---------------------------------------------------------------- sweep ----

struct SweepOpts {
  CommonOpts c;
  std::string param = "n";
  std::vector<std::string> values;
  std::string pipeline = "mean";
  std::size_t trials = 20;
  std::size_t n = 12;  // fixed block length for delta sweeps
  double eta = 0.01;
  std::string noise = "none";
};

int run_sweep(const SweepOpts& o) {
  if (o.param != "n" && o.param != "delta")
    throw CLI::ValidationError("--param", "must be n or delta");
  if (o.pipeline != "mean" && o.pipeline != "avg")
    throw CLI::ValidationError("--pipeline", "must be mean or avg");
  if (o.values.empty())
    throw CLI::ValidationError("--values", "give at least one value");

  struct Point {
    std::string label;
    std::size_t n;
    ChannelParams ch;
  };
  std::vector<Point> points;
  for (const std::string& v : o.values) {
    if (o.param == "n") {
      const long n = std::strtol(v.c_str(), nullptr, 10);
      if (n < 2 || n > 24)
        throw CLI::ValidationError("--values", "block lengths in [2, 24]");
      points.push_back(
          {v, std::size_t(n), ChannelParams::from_decimal(o.c.delta)});
    } else {
      points.push_back({v, o.n, ChannelParams::from_decimal(v)});
    }
  }

  json config;
  config["param"] = o.param;
  config["values"] = o.values;
  config["pipeline"] = o.pipeline;
  config["trials"] = o.trials;
  config["noise"] = o.noise;
  config["seed"] = o.c.seed;
  if (o.param == "n") {
    config["delta"] = o.c.delta;
  } else {
    config["n"] = o.n;
  }
  if (o.pipeline == "avg") config["eta"] = o.eta;
  const NoiseMode noise = parse_noise(o.noise);

  // one flat task per (point, trial); chunk layout is thread-independent
  const std::size_t total = points.size() * o.trials;
  std::vector<std::uint8_t> ok(total, 0), flag(total, 0);
  std::vector<AvgParams> schedules(points.size());
  if (o.pipeline == "avg")
    for (std::size_t p = 0; p < points.size(); ++p)
      schedules[p] = avg_params(std::uint32_t(points[p].n), o.eta,
                                points[p].ch, AvgMultipliers{});

  parallel_for_chunks(0, total, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t p = i / o.trials;
      const std::size_t t = i % o.trials;
      const Point& pt = points[p];
      Rng rng(hash_combine(hash_combine(o.c.seed, p), t));
      const BitString x = BitString::random(pt.n, rng);
      OracleConfig cfg;
      cfg.backend = OracleBackend::kExact;
      cfg.noise = noise;
      cfg.seed = hash_combine(hash_combine(o.c.seed, 0x737765ULL + p), t);
      SqOracle oracle(cfg, x, pt.ch);
      if (o.pipeline == "mean") {
        const double tau = default_mean_tau(pt.n, pt.ch);
        const MeanBasedResult r = mean_based_reconstruct(oracle, tau);
        ok[i] = !r.failed && r.recovered == x;
        flag[i] = r.failed;
      } else {
        const AvgResult r =
            avg_reconstruct(oracle, schedules[p], AvgBackend::kExactMean);
        ok[i] = !r.failed && r.x == x;
        flag[i] = r.failed;
      }
    }
  });

  std::string s = csv_header("sweep", config);
  s += o.param + ",trials,recovered,flagged\n";
  bool any_flagged = false;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::size_t rec = 0, fl = 0;
    for (std::size_t t = 0; t < o.trials; ++t) {
      rec += ok[p * o.trials + t];
      fl += flag[p * o.trials + t];
    }
    any_flagged |= fl > 0;
    s += points[p].label + "," + std::to_string(o.trials) + "," +
         std::to_string(rec) + "," + std::to_string(fl) + "\n";
  }
  emit(o.c.out, s);
  return any_flagged ? kExitFlagged : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistical-query experiments on the deletion channel"};
  app.require_subcommand(1);
  app.set_config("--config", "", "configuration file (INI/TOML)");
  app.get_formatter()->column_width(30);

  StatsOpts stats;
  CLI::App* s_stats = app.add_subcommand("stats", "exact window signature");
  add_common(s_stats, stats.c);
  s_stats->add_option("--x", stats.x, "source bits");
  s_stats->add_option("--n", stats.n, "random source length");
  s_stats->add_option("--ell", stats.ell, "window length")
      ->capture_default_str();
  s_stats->add_option("--format", stats.format, "json or csv")
      ->capture_default_str();

  MeanOpts mean;
  CLI::App* s_mean =
      app.add_subcommand("reconstruct-mean", "mean-based reconstruction");
  add_common(s_mean, mean.c);
  s_mean->add_option("--n", mean.n, "source length")->capture_default_str();
  s_mean->add_flag("--exhaustive", mean.exhaustive, "all 2^n sources");
  s_mean->add_flag("--rational", mean.rational,
                   "exact rational arithmetic, noiseless");
  s_mean->add_option("--trials", mean.trials, "random sources when not exhaustive")
      ->capture_default_str();
  s_mean->add_option("--noise", mean.noise, "none, uniform or adversarial")
      ->capture_default_str();
  s_mean->add_option("--tau", mean.tau, "per-query tolerance, 0 = derived")
      ->capture_default_str();

  WorstOpts worst;
  CLI::App* s_worst =
      app.add_subcommand("reconstruct-worst", "pairwise tournament recovery");
  add_common(s_worst, worst.c);
  s_worst->add_option("--x", worst.x, "source bits");
  s_worst->add_option("--n", worst.n, "random source length");
  s_worst->add_option("--trials", worst.trials, "random sources")
      ->capture_default_str();
  s_worst->add_option("--noise", worst.noise, "none, uniform or adversarial")
      ->capture_default_str();
  s_worst->add_option("--tau0", worst.tau0, "per-query tolerance override");

  AvgOpts avg;
  CLI::App* s_avg =
      app.add_subcommand("reconstruct-avg", "schedule-driven reconstruction");
  add_common(s_avg, avg.c);
  s_avg->add_option("--n", avg.n, "source length")->capture_default_str();
  s_avg->add_option("--eta", avg.eta, "failure budget")->capture_default_str();
  s_avg->add_option("--backend", avg.backend, "mean or greedy")
      ->capture_default_str();
  s_avg->add_option("--trials", avg.trials, "random sources")
      ->capture_default_str();
  s_avg->add_option("--noise", avg.noise, "none, uniform or adversarial")
      ->capture_default_str();
  add_multipliers(s_avg, avg.mult);

  SwOpts sw;
  CLI::App* s_sw =
      app.add_subcommand("sw-table", "degraded window statistics table");
  add_common(s_sw, sw.c);
  s_sw->add_option("--x", sw.x, "source bits");
  s_sw->add_option("--n", sw.n, "random source length");
  s_sw->add_option("--eta", sw.eta, "failure budget")->capture_default_str();
  s_sw->add_option("--grid-points", sw.grid_points, "rates sampled from the grid")
      ->capture_default_str();
  s_sw->add_option("--format", sw.format, "json or csv")
      ->capture_default_str();
  add_multipliers(s_sw, sw.mult);

  DegradeOpts degrade;
  CLI::App* s_deg =
      app.add_subcommand("degrade", "re-express statistics at a higher rate");
  add_common(s_deg, degrade.c);
  s_deg->add_option("--x", degrade.x, "source bits");
  s_deg->add_option("--n", degrade.n, "random source length");
  s_deg->add_option("--delta2", degrade.delta2, "target rate, decimal")
      ->capture_default_str();
  s_deg->add_option("--ell-out", degrade.ell_out, "output window length")
      ->capture_default_str();
  s_deg->add_option("--tau2", degrade.tau2, "output tolerance target")
      ->capture_default_str();
  s_deg->add_option("--start", degrade.start, "output window start")
      ->capture_default_str();

  LowerOpts lower;
  CLI::App* s_low =
      app.add_subcommand("lowerbound", "middle-bit visibility experiment");
  add_common(s_low, lower.c);
  s_low->add_option("--n", lower.n, "source length, even")
      ->capture_default_str();
  s_low->add_option("--ell", lower.ell, "query positions per junta")
      ->capture_default_str();
  s_low->add_option("--trials", lower.trials, "random (source, query) pairs")
      ->capture_default_str();

  CertifyOpts certify;
  CLI::App* s_cert =
      app.add_subcommand("certify", "exact closeness certificate for a pair");
  add_common(s_cert, certify.c);
  s_cert->add_option("--a", certify.a, "first string");
  s_cert->add_option("--a2", certify.a2, "second string");
  s_cert->add_option("--n", certify.n, "constructed pair length")
      ->capture_default_str();
  s_cert->add_option("--ell", certify.ell, "certificate window length")
      ->capture_default_str();

  SweepOpts sweep;
  CLI::App* s_sweep = app.add_subcommand("sweep", "recovery-rate table");
  add_common(s_sweep, sweep.c);
  s_sweep->add_option("--param", sweep.param, "n or delta")
      ->capture_default_str();
  s_sweep->add_option("--values", sweep.values, "swept values")
      ->delimiter(',');
  s_sweep->add_option("--pipeline", sweep.pipeline, "mean or avg")
      ->capture_default_str();
  s_sweep->add_option("--trials", sweep.trials, "sources per point")
      ->capture_default_str();
  s_sweep->add_option("--n", sweep.n, "block length for delta sweeps")
      ->capture_default_str();
  s_sweep->add_option("--eta", sweep.eta, "failure budget for avg")
      ->capture_default_str();
  s_sweep->add_option("--noise", sweep.noise, "none, uniform or adversarial")
      ->capture_default_str();

  // lets --config and other app-level flags appear after the subcommand name
  for (CLI::App* sub :
       app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (s_stats->parsed()) return run_stats(stats);
    if (s_mean->parsed()) return run_mean(mean);
    if (s_worst->parsed()) return run_worst(worst);
    if (s_avg->parsed()) return run_avg(avg);
    if (s_sw->parsed()) return run_sw(sw);
    if (s_deg->parsed()) return run_degrade(degrade);
    if (s_low->parsed()) return run_lower(lower);
    if (s_cert->parsed()) return run_certify(certify);
    if (s_sweep->parsed()) return run_sweep(sweep);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ToleranceRefused& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
