#pragma once

#include <complex>

namespace pdanet {

// Hankel function of the first kind, order zero, for complex argument with
// Im(z) >= 0. Power series below |z| = 12, Hankel asymptotic expansion above.
std::complex<double> hankel1_0(std::complex<double> z);

} // namespace pdanet
