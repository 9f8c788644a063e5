#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "trsq/degrade.hpp"
#include "trsq/rng.hpp"

using namespace trsq;

TEST_CASE("selector distribution") {
  SUBCASE("retention one is deterministic") {
    const auto d = selector_pmf(1.0, 3, 4, 10);
    CHECK(d.start_prob(2) == 1.0);  // third one sits at index 2
    CHECK(d.start_prob(1) == 0.0);
    CHECK(d.start_prob(3) == 0.0);
    REQUIRE(d.outcomes.size() == 1);
    CHECK(d.outcomes[0].first == std::vector<std::uint32_t>{1, 1, 1});
    CHECK(d.outcomes[0].second == 1.0);
    CHECK(d.tail_mass == 0.0);
  }

  SUBCASE("single gap at one half is dyadic") {
    const auto d = selector_pmf(0.5, 1, 2, 6);
    REQUIRE(d.outcomes.size() == 6);
    for (const auto& [gaps, mass] : d.outcomes)
      CHECK(mass == std::pow(2.0, -double(gaps[0])));
    CHECK(d.tail_mass == 0.015625);  // 2^-6 exactly
  }

  SUBCASE("span mean matches gaps over retention") {
    const auto d = selector_pmf(0.5, 2, 3, 200);
    double mean = 0.0;
    for (const auto& [gaps, mass] : d.outcomes)
      mean += mass * double(gaps[0] + gaps[1]);
    CHECK(mean == doctest::Approx(2.0 / 0.5).epsilon(1e-9));
  }

  SUBCASE("truncation tail is the exact negative binomial tail") {
    const auto d = selector_pmf(0.3, 1, 3, 12);
    CHECK(d.tail_mass ==
          doctest::Approx(negbin_tail_exact(2, 0.3, 12.0)).epsilon(1e-12));
    // s = t m / p with t = s p / m = 1.8 > 1: the published bound covers it
    CHECK(d.tail_mass <= negbin_tail_bound(2, 0.3, 12.0 * 0.3 / 2.0));
  }

  SUBCASE("bad parameters are rejected") {
    CHECK_THROWS_AS(selector_pmf(0.0, 1, 2, 4), std::invalid_argument);
    CHECK_THROWS_AS(selector_pmf(1.5, 1, 2, 4), std::invalid_argument);
    CHECK_THROWS_AS(selector_pmf(0.5, 0, 2, 4), std::invalid_argument);
  }
}

TEST_CASE("negative binomial tail bound") {
  SUBCASE("worked example at m = 1") {
    const double bound = negbin_tail_bound(1, 0.5, 2.0);
    CHECK(bound == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));
    // exact tail: no head in the first 4 of the t m / p = 4 trials
    CHECK(negbin_tail_exact(1, 0.5, 4.0) == doctest::Approx(0.0625));
    CHECK(negbin_tail_exact(1, 0.5, 4.0) <= bound);
  }

  SUBCASE("bound is vacuous as t approaches one") {
    CHECK(negbin_tail_bound(5, 0.3, 1.0 + 1e-7) > 0.999);
    CHECK_THROWS_AS(negbin_tail_bound(5, 0.3, 1.0), std::invalid_argument);
  }

  SUBCASE("bound dominates the exact tail on a parameter grid") {
    for (std::uint32_t m : {1u, 2u, 4u, 8u})
      for (double p : {0.1, 0.3, 0.5, 0.9})
        for (double t : {1.5, 2.0, 3.0, 6.0}) {
          const double exact = negbin_tail_exact(m, p, t * double(m) / p);
          CHECK(exact <= negbin_tail_bound(m, p, t));
        }
  }

  SUBCASE("exact tail edge cases") {
    CHECK(negbin_tail_exact(3, 0.4, 2.0) == 1.0);  // cannot finish in 2 trials
    CHECK(negbin_tail_exact(3, 1.0, 3.0) == 0.0);
    CHECK(negbin_tail_exact(0, 0.4, 5.0) == 0.0);
  }
}

TEST_CASE("span bound inversion") {
  CHECK(span_bound_for(1.0, 2, std::exp(-2.0)) == 16);
  CHECK(span_bound_for(0.5, 2, std::exp(-2.0)) == 32);  // halved retention
  // near-vacuous budget lands on the t = 2 floor
  CHECK(span_bound_for(0.5, 3, 0.999999) == 8);
  CHECK_THROWS_AS(span_bound_for(0.5, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(span_bound_for(0.5, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(span_bound_for(0.0, 2, 0.5), std::invalid_argument);
}

TEST_CASE("degraded window statistics") {
  Rng rng(41);
  const BitString x = BitString::random(10, rng);

  SUBCASE("identity degradation marginalizes the window") {
    const auto sig = exact_subword_signature(x, ChannelParams::of(0.3), 6);
    const auto spec = DegradeSpec::make(0.3, 0.3, 6, 3, 1e-6);
    const auto want = exact_subword_signature(x, ChannelParams::of(0.3), 3);
    for (std::uint32_t k : {0u, 3u, 9u}) {
      const auto got = degrade_subword_stats(sig, spec, k);
      for (std::size_t w = 0; w < 8; ++w)
        CHECK(got.phat[w] == doctest::Approx(want.at(k, w)).epsilon(1e-12));
    }
  }

  SUBCASE("single-bit statistics transfer exactly") {
    const auto sig = exact_subword_signature(x, ChannelParams::of(0.2), 4);
    const auto spec = DegradeSpec::make(0.2, 0.5, 4, 1, 1e-6);
    const auto want = exact_subword_signature(x, ChannelParams::of(0.5), 1);
    for (std::uint32_t k = 0; k < 10; ++k) {
      const auto got = degrade_subword_stats(sig, spec, k);
      CHECK(got.tail_mass == 0.0);
      for (std::size_t w = 0; w < 2; ++w)
        CHECK(got.phat[w] == doctest::Approx(want.at(k, w)).epsilon(1e-12));
    }
  }

  SUBCASE("pair statistics meet the requested budget") {
    const auto sig = exact_subword_signature(x, ChannelParams::of(0.2), 10);
    const auto spec = DegradeSpec::make(0.2, 0.4, 10, 2, 2e-9);
    const auto want = exact_subword_signature(x, ChannelParams::of(0.4), 2);
    for (std::uint32_t k : {0u, 4u}) {
      const auto got = degrade_subword_stats(sig, spec, k);
      for (std::size_t w = 0; w < 4; ++w)
        CHECK(std::abs(got.phat[w] - want.at(k, w)) <= 1e-8);
    }
  }

  SUBCASE("real truncation stays inside the reported tail") {
    Rng r2(42);
    const BitString y = BitString::random(16, r2);
    const auto sig = exact_subword_signature(y, ChannelParams::of(0.2), 16);
    const auto want = exact_subword_signature(y, ChannelParams::of(0.6), 2);
    // beta_r = 0.5; a generous tail budget keeps the span below the horizon
    auto loose = DegradeSpec::make(0.2, 0.6, 16, 2, 1.0);
    REQUIRE(span_bound_for(loose.beta_r, 2, loose.xi) < 15);
    auto tight = DegradeSpec::make(0.2, 0.6, 16, 2, 1e-4);
    double worst_loose = 0.0, worst_tight = 0.0;
    const auto gl = degrade_subword_stats(sig, loose, 0);
    const auto gt = degrade_subword_stats(sig, tight, 0);
    CHECK(gl.tail_mass > 1e-5);
    for (std::size_t w = 0; w < 4; ++w) {
      worst_loose = std::max(worst_loose, std::abs(gl.phat[w] - want.at(0, w)));
      worst_tight = std::max(worst_tight, std::abs(gt.phat[w] - want.at(0, w)));
    }
    CHECK(worst_loose <= gl.tail_mass);
    CHECK(worst_tight <= gt.tail_mass + 1e-12);  // tail ~ 0, rounding remains
    CHECK(worst_tight <= worst_loose + 1e-15);  // wider span never hurts
  }

  SUBCASE("window and start edge cases") {
    const auto sig = exact_subword_signature(x, ChannelParams::of(0.2), 4);
    const auto spec = DegradeSpec::make(0.2, 0.5, 4, 2, 1e-6);
    CHECK_THROWS_AS(degrade_subword_stats(sig, spec, 0),
                    std::invalid_argument);  // span needs a wider window
    const auto far = degrade_subword_stats(sig, spec, 12);
    CHECK(far.phat[0] == 1.0);
    const auto tol = degrade_subword_stats(sig, spec, 12, 1e-9);
    CHECK(tol.input_tol == doctest::Approx(8e-9));
  }

  SUBCASE("spec validation") {
    CHECK_THROWS_AS(DegradeSpec::make(0.5, 0.2, 4, 2, 1e-6),
                    std::invalid_argument);
    CHECK_THROWS_AS(DegradeSpec::make(0.2, 1.0, 4, 2, 1e-6),
                    std::invalid_argument);
    auto s = DegradeSpec::make(0.2, 0.5, 4, 2, 1e-6);
    s.xi = s.tau2;  // tail budget above tau2 / 2
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = DegradeSpec::make(0.2, 0.5, 4, 2, 1e-6);
    s.beta_r = 0.9;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
}

TEST_CASE("two-stage channel composition") {
  CHECK(compose_channels_check(BitString::from_string("1011"), 0.3, 0.3, 3) <=
        1e-12);
  CHECK(compose_channels_check(BitString::from_string("1011"), 0.3, 0.6, 3) <=
        1e-10);
  Rng rng(17);
  const BitString x = BitString::random(10, rng);
  for (std::uint32_t ell : {1u, 2u, 3u}) {
    CHECK(compose_channels_check(x, 0.2, 0.5, ell) <= 1e-10);
    CHECK(compose_channels_check(x, 0.3, 0.6, ell) <= 1e-10);
  }
  CHECK_THROWS_AS(compose_channels_check(x, 0.6, 0.3, 2),
                  std::invalid_argument);
  Rng r2(18);
  CHECK_THROWS_AS(compose_channels_check(BitString::random(13, r2), 0.2, 0.5, 2),
                  std::invalid_argument);
}
