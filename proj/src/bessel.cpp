#include "pdanet/bessel.hpp"

#include <cmath>
#include <stdexcept>

#include "pdanet/constants.hpp"

namespace pdanet {
namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kSeriesCut = 12.0;

using cdouble = std::complex<double>;

// J0 and Y0 by their ascending power series. Usable to |z| ~ 16 in double;
// we switch to the asymptotic form well before cancellation matters.
void j0_y0_series(cdouble z, cdouble& j0, cdouble& y0) {
  const cdouble q = -0.25 * z * z;
  cdouble term(1.0, 0.0);
  cdouble jsum = term;
  cdouble hsum(0.0, 0.0); // sum of harmonic-weighted terms for Y0
  double harmonic = 0.0;
  for (int k = 1; k <= 40; ++k) {
    term *= q / static_cast<double>(k * k);
    jsum += term;
    harmonic += 1.0 / k;
    hsum += -term * harmonic; // (-1)^{k+1} (z^2/4)^k H_k / (k!)^2 = -term_k H_k
    if (std::abs(term) < 1e-18 * std::abs(jsum) && k > 4) break;
  }
  j0 = jsum;
  y0 = (2.0 / constants::pi) * ((std::log(0.5 * z) + kEulerGamma) * j0 + hsum);
}

// Asymptotic expansion: H0(z) ~ sqrt(2/(pi z)) e^{i(z - pi/4)} sum_k a_k (i/z)^k,
// a_k = prod_{m=1..k} -(2m-1)^2 / (8 k!)-style coefficients (A&S 9.2.5, nu=0).
cdouble h0_asymptotic(cdouble z) {
  cdouble sum(1.0, 0.0);
  cdouble term(1.0, 0.0);
  const cdouble iz = cdouble(0.0, 1.0) / z;
  double prev = 1.0;
  for (int k = 1; k <= 24; ++k) {
    const double m = 2.0 * k - 1.0;
    term *= -(m * m) / (8.0 * k) * iz;
    const double mag = std::abs(term);
    if (mag > prev) break; // divergent tail reached; stop at smallest term
    prev = mag;
    sum += term;
    if (mag < 1e-17) break;
  }
  const cdouble phase = z - cdouble(0.25 * constants::pi, 0.0);
  return std::sqrt(2.0 / (constants::pi * z)) *
         std::exp(cdouble(0.0, 1.0) * phase) * sum;
}

} // namespace

std::complex<double> hankel1_0(std::complex<double> z) {
  if (z == cdouble(0.0, 0.0))
    throw std::domain_error("hankel1_0: singular at z = 0");
  if (std::abs(z) < kSeriesCut) {
    cdouble j0, y0;
    j0_y0_series(z, j0, y0);
    return j0 + cdouble(0.0, 1.0) * y0;
  }
  return h0_asymptotic(z);
}

} // namespace pdanet
