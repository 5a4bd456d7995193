#include "pdanet/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdanet/rng.hpp"

namespace pdanet::degrade {

void DegradationConfig::validate() const {
  if (blur_sigma_px < 0 || noise_sigma < 0 || line_amp < 0 || drift_shear_px < 0)
    throw std::invalid_argument("DegradationConfig: amplitudes must be >= 0");
}

namespace {

// index reflection without edge repetition (..., 2, 1, 0, 1, 2, ...)
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

} // namespace

ScalarField2D gaussian_blur(const ScalarField2D& img, double sigma_px) {
  if (sigma_px < 0) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
  if (sigma_px == 0.0) return img;

  const auto kernel = gaussian_kernel(sigma_px);
  const int radius = static_cast<int>(kernel.size()) / 2;
  ScalarField2D tmp = img, out = img;

  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[t + radius] * img.at(r, reflect(c + t, img.width));
      tmp.at(r, c) = acc;
    }
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[t + radius] * tmp.at(reflect(r + t, img.height), c);
      out.at(r, c) = acc;
    }
  return out;
}

ScalarField2D scan_line_noise(const ScalarField2D& img, double amp, std::uint64_t seed) {
  if (amp < 0) throw std::invalid_argument("scan_line_noise: amp must be >= 0");
  if (amp == 0.0) return img;
  ScalarField2D out = img;
  Rng rng(seed);
  for (int r = 0; r < img.height; ++r) {
    const double offset = rng.uniform(-amp, amp);
    for (int c = 0; c < img.width; ++c) out.at(r, c) += offset;
  }
  return out;
}

ScalarField2D drift_shear(const ScalarField2D& img, double shear_px) {
  if (shear_px == 0.0) return img;
  ScalarField2D out = img;
  for (int r = 0; r < img.height; ++r) {
    const double shift = shear_px * r / (img.height - 1);
    const double base = std::floor(shift);
    const double frac = shift - base;
    const int s = static_cast<int>(base);
    for (int c = 0; c < img.width; ++c) {
      const double a = img.at(r, reflect(c - s, img.width));
      const double b = img.at(r, reflect(c - s - 1, img.width));
      out.at(r, c) = (1.0 - frac) * a + frac * b;
    }
  }
  return out;
}

ScalarField2D degrade(const ScalarField2D& img, const DegradationConfig& cfg) {
  cfg.validate();
  Rng master(cfg.seed);
  const std::uint64_t shear_seed = master.next_u64();
  const std::uint64_t line_seed = master.next_u64();
  const std::uint64_t noise_seed = master.next_u64();

  ScalarField2D out = img;
  if (cfg.drift_shear_px > 0.0) {
    Rng r(shear_seed);
    out = drift_shear(out, cfg.drift_shear_px * r.uniform(-1.0, 1.0));
  }
  out = gaussian_blur(out, cfg.blur_sigma_px);
  out = scan_line_noise(out, cfg.line_amp, line_seed);
  if (cfg.noise_sigma > 0.0) {
    Rng r(noise_seed);
    for (double& v : out.values) v += r.normal(0.0, cfg.noise_sigma);
  }
  for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

} // namespace pdanet::degrade
