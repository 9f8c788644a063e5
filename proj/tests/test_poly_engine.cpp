#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "trsq/poly_engine.hpp"
#include "trsq/rng.hpp"

using namespace trsq;

namespace {

Complex cpow(Complex b, std::size_t e) {
  Complex r = 1.0;
  for (std::size_t k = 0; k < e; ++k) r *= b;
  return r;
}

// direct sum over all index tuples, no DP
Complex brute_source_poly(const BitString& x, unsigned ell, unsigned widx,
                          Complex z, Complex t) {
  const std::size_t n = x.size();
  std::vector<std::uint32_t> idx(ell);
  Complex acc = 0.0;
  std::function<void(unsigned, std::size_t)> rec = [&](unsigned k,
                                                       std::size_t next) {
    if (k == ell) {
      const std::size_t slack = idx[ell - 1] - idx[0] - (ell - 1);
      acc += cpow(z, idx[0]) * cpow(t, slack);
      return;
    }
    for (std::size_t j = next; j < n; ++j) {
      if (x[j] != pattern_bit(widx, k)) continue;
      idx[k] = std::uint32_t(j);
      rec(k + 1, j + 1);
    }
  };
  rec(0, 0);
  return acc;
}

Complex unit_circle(Rng& rng) {
  const double theta = 2.0 * 3.14159265358979323846 * rng.uniform();
  return {std::cos(theta), std::sin(theta)};
}

Complex unit_disk(Rng& rng) {
  return unit_circle(rng) * std::sqrt(rng.uniform());
}

}  // namespace

TEST_CASE("complex polynomial basics") {
  ComplexPoly p({{1.0, 0.0}, {0.0, 0.0}, {-2.0, 0.0}});  // 1 - 2z^2
  CHECK(p.degree() == 2);
  CHECK(std::abs(p.eval({2.0, 0.0}) - Complex(-7.0, 0.0)) <= 1e-15);

  SUBCASE("trim removes exact trailing zeros only") {
    ComplexPoly q({{1.0, 0.0}, {0.0, 0.0}});
    q.trim();
    CHECK(q.coeffs.size() == 1);
    CHECK(q.degree() == 0);
    ComplexPoly zero({{0.0, 0.0}, {0.0, 0.0}});
    CHECK(zero.is_zero());
    zero.trim();
    CHECK(zero.coeffs.empty());
  }

  SUBCASE("real coefficients commute with conjugation") {
    Rng rng(101);
    ComplexPoly q;
    for (int k = 0; k < 9; ++k)
      q.coeffs.emplace_back(2.0 * rng.uniform() - 1.0, 0.0);
    for (int rep = 0; rep < 20; ++rep) {
      const Complex z = unit_disk(rng);
      CHECK(std::abs(q.eval(std::conj(z)) - std::conj(q.eval(z))) <= 1e-12);
    }
  }
}

TEST_CASE("one-bit stat difference polynomial") {
  const auto ch = ChannelParams::of(0.4);
  const double rho = ch.rho();

  SUBCASE("equal strings give the zero polynomial") {
    Rng rng(103);
    const auto a = BitString::random(9, rng);
    CHECK(deletion_channel_poly(a, a, ch).is_zero());
  }

  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(deletion_channel_poly(BitString(3), BitString(4), ch),
                    std::invalid_argument);
  }

  SUBCASE("single-bit difference matches the closed form") {
    Rng rng(107);
    for (std::size_t j : {0u, 3u, 7u}) {
      auto a = BitString::random(8, rng);
      auto b = a.with_flipped(j);
      const auto p = deletion_channel_poly(a, b, ch);
      const double sign = a[j] ? 1.0 : -1.0;
      for (int rep = 0; rep < 8; ++rep) {
        const Complex z = unit_circle(rng);
        const Complex w = (1.0 - rho) + rho * z;
        CHECK(std::abs(p.eval(z) - rho * sign * cpow(w, j)) <= 1e-10);
      }
    }
  }

  SUBCASE("general pairs match the transformed character sum") {
    Rng rng(109);
    for (int rep = 0; rep < 6; ++rep) {
      const std::size_t n = 6 + rng.below(7);  // 6..12
      const auto a = BitString::random(n, rng);
      auto b = BitString::random(n, rng);
      if (a == b) b = a.with_flipped(0);
      const auto p = deletion_channel_poly(a, b, ch);
      for (int zi = 0; zi < 32; ++zi) {
        const Complex z = unit_circle(rng);
        const Complex w = (1.0 - rho) + rho * z;
        Complex want = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          want += (double(a[j]) - double(b[j])) * cpow(w, j);
        want *= rho;
        CHECK(std::abs(p.eval(z) - want) <= 1e-10);
      }
    }
  }
}

TEST_CASE("boundary max sampling") {
  CHECK(circle_max(ComplexPoly(std::vector<Complex>{Complex(-3.0, 4.0)}), 64) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(circle_max(ComplexPoly({{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}), 256) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // 1 - z peaks at z = -1
  CHECK(circle_max(ComplexPoly({{1.0, 0.0}, {-1.0, 0.0}}), 4096) ==
        doctest::Approx(2.0).epsilon(1e-5));
  CHECK_THROWS_AS(
      circle_max(ComplexPoly(std::vector<Complex>{Complex(1.0, 0.0)}), 32),
      std::invalid_argument);

  SUBCASE("monotone in samples and below the coefficient-sum bound") {
    Rng rng(113);
    for (int rep = 0; rep < 5; ++rep) {
      ComplexPoly p;
      double l1 = 0.0;
      for (int k = 0; k < 12; ++k) {
        p.coeffs.push_back(unit_disk(rng));
        l1 += std::abs(p.coeffs.back());
      }
      const double a = circle_max(p, 64);
      const double b = circle_max(p, 512);
      const double c = circle_max(p, 4096);
      CHECK(a <= b + 1e-15);
      CHECK(b <= c + 1e-15);
      CHECK(c <= l1 + 1e-12);
    }
  }
}

TEST_CASE("source-side polynomial") {
  Rng rng(127);

  SUBCASE("single-symbol pattern is a character sum") {
    const auto x = BitString::from_string("1011001");
    for (int rep = 0; rep < 10; ++rep) {
      const Complex z = unit_disk(rng);
      Complex want = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j]) want += cpow(z, j);
      CHECK(std::abs(source_poly_P(x, 1, 1, z, unit_disk(rng)) - want) <=
            1e-12);
    }
  }

  SUBCASE("value at the origin detects the leading window") {
    const auto x = BitString::from_string("10110");
    const unsigned w_match = pattern_from_str("101");
    const unsigned w_miss = pattern_from_str("011");
    CHECK(std::abs(source_poly_P(x, 3, w_match, 0.0, 0.0) - 1.0) <= 1e-15);
    CHECK(std::abs(source_poly_P(x, 3, w_miss, 0.0, 0.0)) <= 1e-15);
  }

  SUBCASE("agrees with the direct tuple sum") {
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t n = 8 + rng.below(9);  // 8..16
      const unsigned ell = 1 + unsigned(rng.below(4));
      const auto x = BitString::random(n, rng);
      const unsigned widx = unsigned(rng.below(1u << ell));
      const Complex z = unit_disk(rng), t = unit_disk(rng);
      const Complex got = source_poly_P(x, ell, widx, z, t);
      const Complex want = brute_source_poly(x, ell, widx, z, t);
      CHECK(std::abs(got - want) <= 1e-10);
    }
  }
}

TEST_CASE("trace-side polynomial") {
  SUBCASE("patterns with a 1 vanish on the all-zero string") {
    const auto ch = ChannelParams::of(0.5);
    CHECK(std::abs(trace_side_Q(BitString(8), ch, 2, 2, {0.9, 0.1}, {0.6, 0.0},
                                8)) <= 1e-15);
  }

  SUBCASE("full-span sum reproduces the source polynomial") {
    Rng rng(131);
    for (int rep = 0; rep < 12; ++rep) {
      const std::size_t n = 6 + rng.below(7);  // 6..12
      const unsigned ell = 1 + unsigned(rng.below(3));
      const double delta = 0.25 + 0.5 * rng.uniform();
      const auto ch = ChannelParams::of(delta);
      const auto x = BitString::random(n, rng);
      const unsigned widx = unsigned(rng.below(1u << ell));
      const Complex z1 = unit_disk(rng), z2 = unit_disk(rng);
      const Complex q = trace_side_Q(x, ch, ell, widx, z1, z2, n);
      const Complex p = source_poly_P(x, ell, widx, z1, z2);
      CHECK(std::abs(q - p) <= 1e-9);
    }
  }

  SUBCASE("identity also holds at the domain corner points") {
    Rng rng(137);
    const auto ch = ChannelParams::of(0.5);
    const double rho = ch.rho();
    const auto x = BitString::random(10, rng);
    const double th = std::pow(10.0, -0.4);
    const Complex arc_z(std::cos(th), std::sin(th));
    for (double t : {1.0 - rho, 1.0 - 0.75 * rho}) {
      for (Complex z : {arc_z, Complex(1.0 - rho, 0.0)}) {
        const Complex q = trace_side_Q(x, ch, 3, 5, z, {t, 0.0}, 10);
        const Complex p = source_poly_P(x, 3, 5, z, {t, 0.0});
        CHECK(std::abs(q - p) <= 1e-9);
      }
    }
  }

  SUBCASE("truncation error shrinks geometrically in the cutoff") {
    const auto ch = ChannelParams::of(0.5);
    Rng rng(139);
    const std::size_t n = 24;
    const auto x = BitString::random(n, rng);
    const unsigned ell = 3;
    const unsigned widx = 5;
    const Complex z{std::cos(std::pow(double(n), -0.4)),
                    std::sin(std::pow(double(n), -0.4))};
    const Complex t{1.0 - 0.75 * ch.rho(), 0.0};  // largest in-domain pull

    const auto mags = trace_term_magnitudes(x, ch, ell, widx, z, t, n - ell);
    CHECK(envelope_decay_ratio(mags, 4) <= 0.75);

    const Complex full = trace_side_Q(x, ch, ell, widx, z, t, n - ell);
    double prev = -1.0;
    for (std::size_t d : {4u, 8u, 12u, 16u}) {
      const double err =
          std::abs(trace_side_Q(x, ch, ell, widx, z, t, d) - full);
      if (prev >= 0.0) CHECK(err <= prev + 1e-15);
      prev = err;
    }
  }
}

TEST_CASE("substring-moment identity residuals") {
  const auto ch = ChannelParams::of(0.45);

  SUBCASE("zero weights give zero residual") {
    const std::vector<Complex> f(8, Complex(0.0));
    const std::vector<Complex> z(3, Complex(0.5, 0.1));
    CHECK(check_mobius(BitString::from_string("1011010"), ch, 3, f, z) == 0.0);
  }

  SUBCASE("single-symbol identity weight reduces to the character form") {
    Rng rng(149);
    const auto x = BitString::random(9, rng);
    const std::vector<Complex> f = {0.0, 1.0};
    for (int rep = 0; rep < 10; ++rep) {
      const std::vector<Complex> z = {unit_disk(rng)};
      CHECK(check_mobius(x, ch, 1, f, z) <= 1e-10);
    }
  }

  SUBCASE("random weights on random strings") {
    Rng rng(151);
    for (int rep = 0; rep < 6; ++rep) {
      const auto x = BitString::random(10, rng);
      std::vector<Complex> f(8), z(3);
      for (auto& v : f) v = unit_disk(rng);
      for (auto& v : z) v = unit_disk(rng);
      CHECK(check_mobius(x, ch, 3, f, z) <= 1e-9);
    }
  }

  SUBCASE("enumeration guard") {
    const std::vector<Complex> f(2, Complex(1.0));
    const std::vector<Complex> z(1, Complex(0.5));
    CHECK_THROWS_AS(check_mobius(BitString(15), ch, 1, f, z),
                    std::invalid_argument);
  }
}

TEST_CASE("evaluation domain membership") {
  const auto ch = ChannelParams::of(0.5);  // rho = 0.5
  const double th = std::pow(32.0, -0.4);
  CHECK(on_unit_arc({std::cos(th), std::sin(th)}, 32));
  CHECK(on_unit_arc({1.0, 0.0}, 32));
  CHECK(!on_unit_arc({std::cos(3 * th), std::sin(3 * th)}, 32));
  CHECK(!on_unit_arc({0.5, 0.0}, 32));
  CHECK(in_low_segment(0.5, ch));
  CHECK(in_low_segment(0.625, ch));
  CHECK(!in_low_segment(0.7, ch));
  CHECK(!in_low_segment(0.4, ch));
}

TEST_CASE("polynomial serialization round trip") {
  ComplexPoly p({{0.5, -1.0}, {0.0, 0.0}, {3.25, 2.0}});
  const auto text = poly_to_json(p);
  const auto back = poly_from_json(text);
  REQUIRE(back.coeffs.size() == p.coeffs.size());
  for (std::size_t k = 0; k < p.coeffs.size(); ++k)
    CHECK(back.coeffs[k] == p.coeffs[k]);
  CHECK_THROWS(poly_from_json("{\"not\":\"an array\"}"));
  CHECK_THROWS(poly_from_json("[[1.0]]"));
}
