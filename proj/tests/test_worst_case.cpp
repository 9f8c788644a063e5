#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "trsq/poly_engine.hpp"
#include "trsq/worst_case.hpp"

using namespace trsq;

namespace {

OracleConfig quiet() {
  OracleConfig cfg;
  cfg.backend = OracleBackend::kExact;
  cfg.noise = NoiseMode::kNone;
  return cfg;
}

}  // namespace

TEST_CASE("default parameter schedule tracks the length") {
  CHECK(WorstCaseParams::for_length(6).ell == 3);
  CHECK(WorstCaseParams::for_length(10).ell == 3);
  CHECK(WorstCaseParams::for_length(32).ell == 4);
  CHECK(WorstCaseParams::for_length(256).ell == 6);
  CHECK(WorstCaseParams::for_length(10).d0 == 7);
  CHECK_NOTHROW(WorstCaseParams::for_length(10).validate());

  WorstCaseParams p;
  p.d0 = p.ell - 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = WorstCaseParams{};
  p.tau0 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = WorstCaseParams{};
  p.seg_points = 2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("mean-based recovery is exact on every string at n = 8") {
  const ChannelParams ch = ChannelParams::of(0.5);
  for (std::uint32_t w = 0; w < (1u << 8); ++w) {
    const BitString x = BitString::from_word(w, 8);
    SqOracle oracle(quiet(), x, ch);
    const auto r = mean_based_reconstruct(oracle, 1e-12);
    CHECK_FALSE(r.failed);
    CHECK(r.recovered == x);
    CHECK(r.worst_residual <= 1e-9);
    // marginal solve touches nothing but single-position windows
    const auto led = oracle.ledger();
    CHECK(led.count == 8);
    CHECK(led.per_ell.size() == 1);
    CHECK(led.per_ell.at(1) == 8);
  }
}

TEST_CASE("mean-based recovery survives uniform noise at n = 16") {
  const ChannelParams ch = ChannelParams::of(0.5);
  OracleConfig cfg = quiet();
  cfg.noise = NoiseMode::kUniformRandom;
  Rng rng(20240816);
  for (int rep = 0; rep < 100; ++rep) {
    const BitString x = BitString::random(16, rng);
    cfg.seed = 7000 + std::uint64_t(rep);
    SqOracle oracle(cfg, x, ch);
    const auto r = mean_based_reconstruct(oracle, 1e-9);
    CHECK_FALSE(r.failed);
    CHECK(r.recovered == x);
  }
}

TEST_CASE("mean-based solve reports failure instead of guessing") {
  // all-zero marginals pulled to 0.49 make the top coordinate blow up
  OracleConfig cfg = quiet();
  cfg.noise = NoiseMode::kAdversarialRounding;
  cfg.confusion_target = 0.5;
  SqOracle oracle(cfg, BitString::from_string("0000"), ChannelParams::of(0.5));
  const auto r = mean_based_reconstruct(oracle, 0.49);
  CHECK(r.failed);
  CHECK(r.first_bad == 3);
  CHECK(r.worst_residual > 0.25);
}

TEST_CASE("rational mean-based inversion is exact at n = 24") {
  Rng rng(31337);
  for (const char* dec : {"0.2", "0.5", "0.8"}) {
    const ChannelParams ch = ChannelParams::from_decimal(dec);
    for (int rep = 0; rep < 5; ++rep) {
      const BitString x = BitString::random(24, rng);
      const auto p = exact_one_bit_stats_rational(x, ch);
      CHECK(mean_based_invert_rational(p, 24, ch) == x);
    }
  }
  const ChannelParams ch = ChannelParams::from_decimal("0.5");
  BitString alt(24);
  for (std::size_t i = 0; i < 24; i += 2) alt.set(i, 1);
  CHECK(mean_based_invert_rational(exact_one_bit_stats_rational(alt, ch), 24,
                                   ch) == alt);
  CHECK_THROWS_AS(mean_based_invert_rational({}, 24, ch),
                  std::invalid_argument);
}

TEST_CASE("window-query estimator reproduces the source polynomial") {
  const ChannelParams ch = ChannelParams::of(0.5);
  Rng rng(4242);
  const double rho = ch.rho();
  for (int rep = 0; rep < 6; ++rep) {
    const std::size_t n = 6 + rng.next_u64() % 5;  // 6..10
    const BitString x = BitString::random(n, rng);
    const unsigned ell = 1 + unsigned(rng.next_u64() % 3);
    const unsigned widx = unsigned(rng.next_u64() % (1u << ell));
    WorstCaseParams params;
    params.ell = ell;
    params.d0 = std::max<unsigned>(ell, unsigned(n) - ell);
    params.tau0 = 1e-12;

    const double theta = std::pow(double(n), -0.4) * (rep % 2 ? 1.0 : -0.37);
    const Complex z = rep % 3 == 0
                          ? Complex(std::cos(theta), std::sin(theta))
                          : Complex(1.0 - rho + 0.25 * rho * (rep % 3));
    const double t = 1.0 - rho + 0.25 * rho * (rep % 4) / 3.0;

    SqOracle oracle(quiet(), x, ch);
    const Complex est = estimate_Q_truncated(oracle, ell, widx, z, t, params);
    const Complex direct = trace_side_Q(x, ch, ell, widx, z, Complex(t),
                                        params.d0);
    const Complex truth = source_poly_P(x, ell, widx, z, Complex(t));
    CHECK(std::abs(est - direct) <= 1e-12);
    CHECK(std::abs(est - truth) <= 1e-9);

    // window lengths stay within the declared locality
    for (const auto& [e, cnt] : oracle.ledger().per_ell) {
      CHECK(e >= ell);
      CHECK(e <= params.d0 + ell);
      CHECK(cnt > 0);
    }
  }
}

TEST_CASE("estimator error stays under the published multiplier") {
  const ChannelParams ch = ChannelParams::of(0.5);
  const BitString x = BitString::from_string("1101001010");
  const unsigned ell = 3;
  WorstCaseParams params;
  params.ell = ell;
  params.d0 = 7;
  params.tau0 = 1e-3;

  OracleConfig cfg = quiet();
  cfg.noise = NoiseMode::kAdversarialRounding;
  cfg.confusion_target = 1.0;  // push every answer up by the full tolerance
  SqOracle noisy(cfg, x, ch);
  SqOracle exact(quiet(), x, ch);

  const double rho = ch.rho();
  const double theta = std::pow(10.0, -0.4);
  const std::vector<std::pair<Complex, double>> pts = {
      {Complex(std::cos(theta), std::sin(theta)), 1.0 - rho},
      {Complex(1.0 - rho), 1.0 - 0.75 * rho},
      {Complex(1.0 - 0.80 * rho), 1.0 - 0.90 * rho},
  };
  for (const auto& [z, t] : pts) {
    const Complex noisy_v = estimate_Q_truncated(noisy, ell, 5, z, t, params);
    const Complex exact_v = estimate_Q_truncated(exact, ell, 5, z, t, params);
    const double mult =
        estimate_Q_error_multiplier(10, ell, z, t, params.d0, ch);
    CHECK(std::abs(noisy_v - exact_v) <= mult * params.tau0 + 1e-12);
    // the crude count-based envelope dominates the sharp one
    CHECK(mult <= 10.0 * std::pow(4.0, double(params.d0)));
  }

  // closed form at ell = 1: every tuple is a bare index, slack 0
  const Complex z0(0.7, 0.1);
  const double a1 = std::abs((z0 - (1.0 - rho)) / rho);
  double geo = 0.0;
  for (int j = 0; j < 4; ++j) geo += std::pow(a1, j);
  CHECK(estimate_Q_error_multiplier(4, 1, z0, 1.0 - rho, 3, ch) ==
        doctest::Approx(geo / rho).epsilon(1e-12));
}

TEST_CASE("distinguisher search certifies separations") {
  const ChannelParams ch = ChannelParams::of(0.5);
  WorstCaseParams params = WorstCaseParams::for_length(8);

  SUBCASE("input validation") {
    const BitString a = BitString::from_string("10100101");
    CHECK_THROWS_AS(
        find_distinguisher(a, BitString::from_string("101"), ch, params),
        std::invalid_argument);
    CHECK_THROWS_AS(find_distinguisher(a, a, ch, params),
                    std::invalid_argument);
    CHECK_THROWS_AS(find_distinguisher(BitString::from_string("10"),
                                       BitString::from_string("01"), ch,
                                       params),
                    std::invalid_argument);
  }

  SUBCASE("differing prefixes pin the scanned pattern") {
    const BitString x1 = BitString::from_string("10000000");
    const BitString x2 = BitString::from_string("00000000");
    const auto cert = find_distinguisher(x1, x2, ch, params);
    CHECK(cert.ell == 3);
    CHECK(cert.widx == 1u);  // window spelling "100"
    CHECK(cert.gap > 0.0);
    CHECK_FALSE(cert.flagged);
    const bool z_ok = on_unit_arc(cert.z, 8, 1e-9) ||
                      (cert.z.imag() == 0.0 &&
                       in_low_segment(cert.z.real(), ch, 1e-9));
    CHECK(z_ok);
    CHECK(in_low_segment(cert.t, ch, 1e-9));
  }

  SUBCASE("equal prefixes fall back to the full pattern sweep") {
    const BitString x1 = BitString::from_string("00010000");
    const BitString x2 = BitString::from_string("00001000");
    const auto cert = find_distinguisher(x1, x2, ch, params);
    CHECK(cert.gap > 0.0);
  }

  SUBCASE("repeat runs return the identical certificate") {
    const BitString x1 = BitString::from_string("01101001");
    const BitString x2 = BitString::from_string("01100110");
    const auto c1 = find_distinguisher(x1, x2, ch, params);
    const auto c2 = find_distinguisher(x1, x2, ch, params);
    CHECK(c1.widx == c2.widx);
    CHECK(c1.z == c2.z);
    CHECK(c1.t == c2.t);
    CHECK(c1.gap == c2.gap);
  }
}

TEST_CASE("every pair of length-8 strings gets a positive gap") {
  const ChannelParams ch = ChannelParams::of(0.5);
  WorstCaseParams params = WorstCaseParams::for_length(8);
  params.arc_points = 5;
  params.seg_points = 5;
  double worst = 1.0;
  for (std::uint32_t a = 0; a < (1u << 8); ++a)
    for (std::uint32_t b = a + 1; b < (1u << 8); ++b) {
      const auto cert = find_distinguisher(BitString::from_word(a, 8),
                                           BitString::from_word(b, 8), ch,
                                           params);
      worst = std::min(worst, cert.gap);
    }
  CHECK(worst > 0.0);
}

TEST_CASE("pairwise tournament recovers every length-6 string") {
  const ChannelParams ch = ChannelParams::of(0.5);
  WorstCaseParams params = WorstCaseParams::for_length(6);
  params.arc_points = 17;
  params.seg_points = 17;

  SUBCASE("exact oracle") {
    for (std::uint32_t w = 0; w < (1u << 6); ++w) {
      const BitString x = BitString::from_word(w, 6);
      SqOracle oracle(quiet(), x, ch);
      const auto r = pairwise_reconstruct(oracle, params);
      CHECK_FALSE(r.ambiguous);
      CHECK(r.recovered == x);
      CHECK(r.min_gap > 0.0);
      CHECK(r.queries > 0);
    }
  }

  SUBCASE("adversarial rounding within the requested tolerances") {
    OracleConfig cfg = quiet();
    cfg.noise = NoiseMode::kAdversarialRounding;
    cfg.confusion_target = 0.5;
    for (std::uint32_t w = 0; w < (1u << 6); ++w) {
      const BitString x = BitString::from_word(w, 6);
      SqOracle oracle(cfg, x, ch);
      const auto r = pairwise_reconstruct(oracle, params);
      CHECK_FALSE(r.ambiguous);
      CHECK(r.recovered == x);
    }
  }
}

TEST_CASE("pairwise tournament handles noisy length-8 instances") {
  const ChannelParams ch = ChannelParams::of(0.5);
  WorstCaseParams params = WorstCaseParams::for_length(8);
  params.arc_points = 9;
  params.seg_points = 9;
  OracleConfig cfg = quiet();
  cfg.noise = NoiseMode::kUniformRandom;
  Rng rng(555);
  for (int rep = 0; rep < 10; ++rep) {
    const BitString x = BitString::random(8, rng);
    cfg.seed = 9000 + std::uint64_t(rep);
    SqOracle oracle(cfg, x, ch);
    const auto r = pairwise_reconstruct(oracle, params);
    CHECK_FALSE(r.ambiguous);
    CHECK(r.recovered == x);
  }
}

TEST_CASE("undersampled backend can empty the field and is reported") {
  // a sampling oracle ignores the requested tolerance, so the survivor ball
  // can miss every candidate; the run must flag that instead of guessing
  WorstCaseParams params = WorstCaseParams::for_length(6);
  params.arc_points = 9;
  params.seg_points = 9;
  OracleConfig cfg;
  cfg.backend = OracleBackend::kMonteCarlo;
  cfg.noise = NoiseMode::kNone;
  cfg.mc_samples = 60;
  cfg.seed = 3;
  SqOracle oracle(cfg, BitString::from_string("101101"),
                  ChannelParams::of(0.5));
  const auto r = pairwise_reconstruct(oracle, params);
  CHECK(r.ambiguous);
}

TEST_CASE("pairwise tournament rejects oversized instances") {
  SqOracle oracle(quiet(), BitString(15), ChannelParams::of(0.5));
  CHECK_THROWS_AS(pairwise_reconstruct(oracle, WorstCaseParams::for_length(15)),
                  std::invalid_argument);
}
