#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pdanet {

// H x W real raster with a physical extent in nm. Row-major, row 0 at
// origin_y. Carries LDOS maps and (normalized) images alike.
struct ScalarField2D {
  int height = 0;
  int width = 0;
  double extent_w_nm = 0.0;
  double extent_h_nm = 0.0;
  double origin_x_nm = 0.0;
  double origin_y_nm = 0.0;
  std::vector<double> values;

  ScalarField2D() = default;
  ScalarField2D(int h, int w, double ext_w_nm = 0.0, double ext_h_nm = 0.0)
      : height(h), width(w), extent_w_nm(ext_w_nm), extent_h_nm(ext_h_nm),
        values(static_cast<std::size_t>(h) * w, 0.0) {
    if (h < 2 || w < 2) throw std::invalid_argument("ScalarField2D: H and W must be >= 2");
  }

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * width + c]; }
  std::size_t size() const { return values.size(); }

  // Physical coordinates of a pixel center.
  double x_of(int c) const { return origin_x_nm + (c + 0.5) * extent_w_nm / width; }
  double y_of(int r) const { return origin_y_nm + (r + 0.5) * extent_h_nm / height; }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::pair<double, double> min_max() const {
    double lo = values[0], hi = values[0];
    for (double v : values) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    return {lo, hi};
  }
};

// Clip at 0, then min-max normalize to [0,1]. STM topographs are rendered
// per scan, so normalization is per image. Returns the pre-normalization
// (min, max) so the physical scale can be recovered from the sidecar.
inline std::pair<double, double> normalize_unit_range(ScalarField2D& f) {
  for (double& v : f.values)
    if (v < 0.0) v = 0.0;
  auto [lo, hi] = f.min_max();
  const double span = hi - lo;
  if (span > 0.0) {
    for (double& v : f.values) v = (v - lo) / span;
  } else {
    for (double& v : f.values) v = 0.0;
  }
  return {lo, hi};
}

} // namespace pdanet
