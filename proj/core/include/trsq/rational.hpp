#pragma once

// Exact arithmetic backend. Certified quantities (pair certificates, the
// n = 24 mean-based path) are computed over rationals so that inequality
// chains can be asserted with = and <=, not with tolerances.

#include <boost/multiprecision/gmp.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace trsq {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

// Exact: every finite double is dyadic.
inline Rational rational_from_double(double d) { return Rational(d); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// "0.35" -> 7/20, "1" -> 1, ".5" -> 1/2. Small denominators, unlike the
// dyadic expansion of the nearest double; keeps certificate arithmetic cheap.
inline Rational rational_from_decimal(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("rational_from_decimal: empty");
  bool neg = false;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    pos = 1;
  }
  BigInt num = 0;
  BigInt den = 1;
  bool saw_digit = false, saw_dot = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c == '.') {
      if (saw_dot) throw std::invalid_argument("rational_from_decimal: two dots");
      saw_dot = true;
    } else if (c >= '0' && c <= '9') {
      num = num * 10 + (c - '0');
      if (saw_dot) den *= 10;
      saw_digit = true;
    } else {
      throw std::invalid_argument("rational_from_decimal: bad char in \"" +
                                  std::string(s) + "\"");
    }
  }
  if (!saw_digit) throw std::invalid_argument("rational_from_decimal: no digits");
  Rational r(num, den);
  return neg ? Rational(-r) : r;
}

inline BigInt binomial_big(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

inline Rational abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

}  // namespace trsq
