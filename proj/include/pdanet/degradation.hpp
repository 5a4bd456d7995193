#pragma once

#include <cstdint>

#include "pdanet/field2d.hpp"

// Synthetic degradation of clean [0,1] images into blurry ones, emulating
// the usual STM acquisition artifacts: slow drift (shear), tip blur,
// per-scan-row offsets, and white electronic noise. Applied in acquisition
// order: shear -> blur -> line noise -> white noise -> clip.

namespace pdanet::degrade {

struct DegradationConfig {
  double blur_sigma_px = 1.5;
  double noise_sigma = 0.03;  // fraction of the [0,1] dynamic range
  double line_amp = 0.05;     // per-row offset amplitude, fraction of range
  double drift_shear_px = 2.0; // max horizontal shear across the full height
  std::uint64_t seed = 0;

  void validate() const;
};

// Separable Gaussian convolution with reflect padding; sigma = 0 is identity.
ScalarField2D gaussian_blur(const ScalarField2D& img, double sigma_px);

// Adds an independent uniform offset in [-amp, amp] to every row.
ScalarField2D scan_line_noise(const ScalarField2D& img, double amp, std::uint64_t seed);

// Linear horizontal shear; row y shifts by shear_px * y/(H-1), reflect edges.
ScalarField2D drift_shear(const ScalarField2D& img, double shear_px);

// Full pipeline; deterministic per (img, cfg.seed); output clipped to [0,1].
ScalarField2D degrade(const ScalarField2D& img, const DegradationConfig& cfg);

} // namespace pdanet::degrade
