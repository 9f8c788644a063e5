#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "trsq/bitstring.hpp"
#include "trsq/channel.hpp"

namespace trsq {

using Complex = std::complex<double>;

struct ComplexPoly {
  std::vector<Complex> coeffs;  // coeffs[k] multiplies z^k

  ComplexPoly() = default;
  explicit ComplexPoly(std::vector<Complex> c) : coeffs(std::move(c)) {}

  Complex eval(Complex z) const;  // Horner
  std::size_t degree() const;     // 0 for the zero polynomial
  bool is_zero() const;
  void trim();  // canonical form: drop exact trailing zeros
};

// coefficients are the per-position one-bit statistic differences of a and b
ComplexPoly deletion_channel_poly(const BitString& a, const BitString& b,
                                  const ChannelParams& ch);

// Max modulus over equispaced points of the unit circle. The sample count is
// rounded up to a power of two so coarser grids nest inside finer ones, which
// makes the result monotone nondecreasing in `samples`; it always lower-bounds
// the true boundary max. Requires samples >= 64.
double circle_max(const ComplexPoly& p, std::size_t samples);

// Sum over index tuples 0 <= i_1 < ... < i_ell <= n-1 whose source bits spell
// the pattern, of z^{i_1} t^{slack}, slack = i_ell - i_1 - (ell-1). Runs the
// skip/select sweep, O(n*ell) per point.
Complex source_poly_P(const BitString& x, unsigned ell, unsigned widx,
                      Complex z, Complex t);

// Trace-side counterpart restricted to tuples with slack <= dmax, built from
// strict-tail joint probabilities; the change of variables
// zeta = (z-(1-rho))/rho happens inside. With dmax >= n - ell this is the
// full polynomial and equals source_poly_P(x, ell, widx, z1, z2).
Complex trace_side_Q(const BitString& x, const ChannelParams& ch, unsigned ell,
                     unsigned widx, Complex z1, Complex z2, std::size_t dmax);

// |homogeneous slack-d term| of the trace-side polynomial, d = 0..dmax
std::vector<double> trace_term_magnitudes(const BitString& x,
                                          const ChannelParams& ch, unsigned ell,
                                          unsigned widx, Complex z1, Complex z2,
                                          std::size_t dmax);

// Largest step-to-step ratio of the right-to-left running envelope of `mags`,
// looking only at indices >= from. A value <= r certifies geometric decay at
// rate r past `from`.
double envelope_decay_ratio(const std::vector<double>& mags, std::size_t from);

// Residual of the substring-moment identity: both sides evaluated by
// exhaustive enumeration. f maps patterns (size 1 << ell) to complex weights;
// z supplies one point per pattern slot. Guarded to n <= 14, ell <= 3.
double check_mobius(const BitString& x, const ChannelParams& ch, unsigned ell,
                    const std::vector<Complex>& f,
                    const std::vector<Complex>& z);

// An evaluation point for the distinguisher search: z on the short unit-circle
// arc around 1 or on the low real segment, t on the low real segment.
struct EvalPoint {
  Complex z;
  double t = 0.0;
};

// membership in {e^{i theta} : |theta| <= n^{-2/5}}
bool on_unit_arc(Complex z, std::size_t n, double tol = 1e-9);
// membership in [1-rho, 1-(3/4)rho]
bool in_low_segment(double v, const ChannelParams& ch, double tol = 1e-12);

// polynomials serialize as a JSON array of [re, im] pairs
std::string poly_to_json(const ComplexPoly& p);
ComplexPoly poly_from_json(const std::string& text);

}  // namespace trsq
