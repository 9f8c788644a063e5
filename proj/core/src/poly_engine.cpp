#include "trsq/poly_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <json.hpp>

#include "trsq/detail/tuple_iter.hpp"

namespace trsq {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

// integer power with ipow(0, 0) == 1, which std::pow on complex gets wrong
Complex ipow(Complex b, std::size_t e) {
  Complex r = 1.0;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

}  // namespace

Complex ComplexPoly::eval(Complex z) const {
  Complex acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * z + coeffs[k];
  return acc;
}

std::size_t ComplexPoly::degree() const {
  std::size_t d = coeffs.size();
  while (d > 1 && coeffs[d - 1] == Complex(0.0)) --d;
  return d == 0 ? 0 : d - 1;
}

bool ComplexPoly::is_zero() const {
  for (const Complex& c : coeffs)
    if (c != Complex(0.0)) return false;
  return true;
}

void ComplexPoly::trim() {
  while (!coeffs.empty() && coeffs.back() == Complex(0.0)) coeffs.pop_back();
}

ComplexPoly deletion_channel_poly(const BitString& a, const BitString& b,
                                  const ChannelParams& ch) {
  if (a.size() != b.size())
    throw std::invalid_argument("deletion_channel_poly: length mismatch");
  const auto sa = exact_one_bit_stats(a, ch);
  const auto sb = exact_one_bit_stats(b, ch);
  ComplexPoly p;
  p.coeffs.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    p.coeffs[i] = Complex(sa.p[i] - sb.p[i], 0.0);
  return p;
}

double circle_max(const ComplexPoly& p, std::size_t samples) {
  if (samples < 64) throw std::invalid_argument("circle_max: samples < 64");
  const std::size_t m = next_pow2(samples);
  double best = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double theta = 2.0 * kPi * double(k) / double(m);
    const Complex z(std::cos(theta), std::sin(theta));
    best = std::max(best, std::abs(p.eval(z)));
  }
  return best;
}

Complex source_poly_P(const BitString& x, unsigned ell, unsigned widx,
                      Complex z, Complex t) {
  const std::size_t n = x.size();
  if (ell < 1 || ell > n)
    throw std::invalid_argument("source_poly_P: pattern length out of range");

  // F[p] = sum over completions choosing pattern slots k..ell-1 from
  // positions >= p, given the first index is already fixed below p; skipped
  // interior positions contribute a factor t each
  std::vector<Complex> f(n + 1), g(n + 1);
  for (auto& v : f) v = 1.0;  // slot k = ell: nothing left to place
  for (unsigned k = ell - 1; k >= 1; --k) {
    g[n] = 0.0;
    const int want = pattern_bit(widx, k);
    for (std::size_t p = n; p-- > 0;) {
      g[p] = t * g[p + 1];
      if (x[p] == want) g[p] += f[p + 1];
    }
    std::swap(f, g);
  }
  Complex acc = 0.0;
  Complex zp = 1.0;
  const int w0 = pattern_bit(widx, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (x[p] == w0) acc += zp * f[p + 1];
    zp *= z;
  }
  return acc;
}

Complex trace_side_Q(const BitString& x, const ChannelParams& ch, unsigned ell,
                     unsigned widx, Complex z1, Complex z2, std::size_t dmax) {
  const std::size_t n = x.size();
  if (ell < 1 || ell > n)
    throw std::invalid_argument("trace_side_Q: pattern length out of range");
  const double rho = ch.rho();
  const Complex zeta1 = (z1 - (1.0 - rho)) / rho;
  const Complex zeta2 = (z2 - (1.0 - rho)) / rho;

  // power tables; exponents stay < n and <= dmax respectively
  std::vector<Complex> z1pow(n), z2pow(dmax + 1);
  z1pow[0] = 1.0;
  for (std::size_t j = 1; j < n; ++j) z1pow[j] = z1pow[j - 1] * zeta1;
  z2pow[0] = 1.0;
  for (std::size_t d = 1; d <= dmax; ++d) z2pow[d] = z2pow[d - 1] * zeta2;

  Complex acc = 0.0;
  detail::for_each_tuple(n, ell, dmax,
                 [&](const std::vector<std::uint32_t>& idx, std::size_t slack) {
                   const double e = joint_trace_match(
                       x, ch, idx, widx, TraceTail::kStrictLength);
                   if (e == 0.0) return;
                   acc += e * z1pow[idx[0]] * z2pow[slack];
                 });
  return acc / ipow(Complex(rho, 0.0), ell);
}

std::vector<double> trace_term_magnitudes(const BitString& x,
                                          const ChannelParams& ch, unsigned ell,
                                          unsigned widx, Complex z1, Complex z2,
                                          std::size_t dmax) {
  const std::size_t n = x.size();
  if (ell < 1 || ell > n)
    throw std::invalid_argument(
        "trace_term_magnitudes: pattern length out of range");
  const double rho = ch.rho();
  const Complex zeta1 = (z1 - (1.0 - rho)) / rho;
  const Complex zeta2 = (z2 - (1.0 - rho)) / rho;

  std::vector<Complex> z1pow(n), z2pow(dmax + 1);
  z1pow[0] = 1.0;
  for (std::size_t j = 1; j < n; ++j) z1pow[j] = z1pow[j - 1] * zeta1;
  z2pow[0] = 1.0;
  for (std::size_t d = 1; d <= dmax; ++d) z2pow[d] = z2pow[d - 1] * zeta2;

  std::vector<Complex> terms(dmax + 1, Complex(0.0));
  detail::for_each_tuple(n, ell, dmax,
                 [&](const std::vector<std::uint32_t>& idx, std::size_t slack) {
                   const double e = joint_trace_match(
                       x, ch, idx, widx, TraceTail::kStrictLength);
                   if (e == 0.0) return;
                   terms[slack] += e * z1pow[idx[0]] * z2pow[slack];
                 });
  const double scale = std::pow(rho, -double(ell));
  std::vector<double> mags(dmax + 1);
  for (std::size_t d = 0; d <= dmax; ++d) mags[d] = std::abs(terms[d]) * scale;
  return mags;
}

double envelope_decay_ratio(const std::vector<double>& mags, std::size_t from) {
  if (mags.empty() || from + 1 >= mags.size()) return 0.0;
  std::vector<double> env(mags.size());
  double run = 0.0;
  for (std::size_t d = mags.size(); d-- > 0;) {
    run = std::max(run, mags[d]);
    env[d] = run;
  }
  double worst = 0.0;
  for (std::size_t d = from; d + 1 < env.size(); ++d) {
    if (env[d] <= 0.0) continue;
    worst = std::max(worst, env[d + 1] / env[d]);
  }
  return worst;
}

double check_mobius(const BitString& x, const ChannelParams& ch, unsigned ell,
                    const std::vector<Complex>& f,
                    const std::vector<Complex>& z) {
  const std::size_t n = x.size();
  if (n > 14 || ell > 3 || ell < 1)
    throw std::invalid_argument("check_mobius: enumeration guard");
  if (f.size() != (std::size_t(1) << ell) || z.size() != ell)
    throw std::invalid_argument("check_mobius: argument size mismatch");
  const double rho = ch.rho();

  // source side: rho^ell * sum over source tuples of
  // f(bits) * w_1^{i_1} * prod w_k^{i_k - i_{k-1} - 1}, w_k = (1-rho)+rho z_k
  std::vector<Complex> wv(ell);
  for (unsigned k = 0; k < ell; ++k) wv[k] = (1.0 - rho) + rho * z[k];
  Complex lhs = 0.0;
  detail::for_each_tuple(
      n, ell, n, [&](const std::vector<std::uint32_t>& idx, std::size_t) {
        unsigned bits = 0;
        for (unsigned k = 0; k < ell; ++k)
          if (x[idx[k]]) bits |= 1u << k;
        Complex term = f[bits] * ipow(wv[0], idx[0]);
        for (unsigned k = 1; k < ell; ++k)
          term *= ipow(wv[k], idx[k] - idx[k - 1] - 1);
        lhs += term;
      });
  lhs *= ipow(Complex(rho, 0.0), ell);

  // trace side: sum over trace tuples of E[f at the positions] with the same
  // gap-power structure in the raw z variables
  Complex rhs = 0.0;
  detail::for_each_tuple(
      n, ell, n, [&](const std::vector<std::uint32_t>& idx, std::size_t) {
        Complex ef = 0.0;
        for (unsigned w = 0; w < (1u << ell); ++w) {
          if (f[w] == Complex(0.0)) continue;
          ef += f[w] *
                joint_trace_match(x, ch, idx, w, TraceTail::kStrictLength);
        }
        if (ef == Complex(0.0)) return;
        Complex term = ef * ipow(z[0], idx[0]);
        for (unsigned k = 1; k < ell; ++k)
          term *= ipow(z[k], idx[k] - idx[k - 1] - 1);
        rhs += term;
      });

  return std::abs(lhs - rhs);
}

bool on_unit_arc(Complex z, std::size_t n, double tol) {
  if (std::abs(std::abs(z) - 1.0) > tol) return false;
  const double theta = std::arg(z);
  return std::abs(theta) <= std::pow(double(n), -0.4) + tol;
}

bool in_low_segment(double v, const ChannelParams& ch, double tol) {
  const double rho = ch.rho();
  return v >= 1.0 - rho - tol && v <= 1.0 - 0.75 * rho + tol;
}

std::string poly_to_json(const ComplexPoly& p) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Complex& c : p.coeffs)
    arr.push_back({c.real(), c.imag()});
  return arr.dump() + "\n";
}

ComplexPoly poly_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_array()) throw std::runtime_error("poly: expected a JSON array");
  ComplexPoly p;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw std::runtime_error("poly: expected [re, im] pairs");
    p.coeffs.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return p;
}

}  // namespace trsq
