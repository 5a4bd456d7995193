#pragma once

#include <filesystem>
#include <string>

#include "pdanet/field2d.hpp"
#include "pdanet/stm_physics.hpp"

// On-disk image formats.
//
// Raster (.ldos): 16-byte header {magic "LDOS", u32 H, u32 W, u32 reserved},
// then H*W little-endian 32-bit floats, row-major. Values are the per-image
// normalized [0,1] pixels; the physical LDOS range lives in the sidecar.
//
// Sidecar (.meta.txt): human-readable `key = value` lines (seed, model
// constants, extent, LDOS range, impurity list).
//
// Preview (.png): optional 16-bit grayscale PNG.

namespace pdanet::io {

void write_raster(const std::filesystem::path& path, const ScalarField2D& field);
ScalarField2D read_raster(const std::filesystem::path& path);

void write_png16(const std::filesystem::path& path, const ScalarField2D& field);

struct ImageMeta {
  std::uint64_t seed = 0;
  stm::SurfaceModel model;
  double extent_w_nm = 0.0;
  double extent_h_nm = 0.0;
  double ldos_min = 0.0;
  double ldos_max = 0.0;
  stm::ImpuritySet impurities;
};

void write_sidecar(const std::filesystem::path& path, const ImageMeta& meta);
ImageMeta read_sidecar(const std::filesystem::path& path);

} // namespace pdanet::io
