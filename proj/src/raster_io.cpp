#include "pdanet/raster_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <png.h>

namespace pdanet::io {

namespace {

constexpr char kMagic[4] = {'L', 'D', 'O', 'S'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

static_assert(sizeof(float) == 4);

} // namespace

void write_raster(const std::filesystem::path& path, const ScalarField2D& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_raster: cannot open " + path.string());
  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(field.height));
  put_u32(os, static_cast<std::uint32_t>(field.width));
  put_u32(os, 0u);
  std::vector<float> row(field.width);
  for (int r = 0; r < field.height; ++r) {
    for (int c = 0; c < field.width; ++c) row[c] = static_cast<float>(field.at(r, c));
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!os) throw std::runtime_error("write_raster: write failed for " + path.string());
}

ScalarField2D read_raster(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_raster: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("read_raster: bad magic in " + path.string());
  const auto h = get_u32(is), w = get_u32(is);
  get_u32(is); // reserved
  if (h < 2 || w < 2 || h > 1u << 20 || w > 1u << 20)
    throw std::runtime_error("read_raster: implausible dimensions in " + path.string());
  ScalarField2D f(static_cast<int>(h), static_cast<int>(w));
  std::vector<float> row(w);
  for (std::uint32_t r = 0; r < h; ++r) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!is) throw std::runtime_error("read_raster: truncated file " + path.string());
    for (std::uint32_t c = 0; c < w; ++c) f.at(r, c) = row[c];
  }
  return f;
}

void write_png16(const std::filesystem::path& path, const ScalarField2D& field) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("write_png16: cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw std::runtime_error("write_png16: libpng failure for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, field.width, field.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<std::uint16_t> row(field.width);
  for (int r = 0; r < field.height; ++r) {
    for (int c = 0; c < field.width; ++c) {
      const double v = std::clamp(field.at(r, c), 0.0, 1.0);
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      row[c] = static_cast<std::uint16_t>((q >> 8) | (q << 8)); // PNG is big-endian
    }
    png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void write_sidecar(const std::filesystem::path& path, const ImageMeta& meta) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_sidecar: cannot open " + path.string());
  os << "seed = " << meta.seed << "\n";
  os << "m_eff = " << fmt(meta.model.m_eff) << "\n";
  os << "mu_eV = " << fmt(meta.model.mu_eV) << "\n";
  os << "omega_eV = " << fmt(meta.model.omega_eV) << "\n";
  os << "eta_eV = " << fmt(meta.model.eta_eV) << "\n";
  os << "cutoff_nm = " << fmt(meta.model.cutoff_nm) << "\n";
  os << "extent_w_nm = " << fmt(meta.extent_w_nm) << "\n";
  os << "extent_h_nm = " << fmt(meta.extent_h_nm) << "\n";
  os << "ldos_min = " << fmt(meta.ldos_min) << "\n";
  os << "ldos_max = " << fmt(meta.ldos_max) << "\n";
  os << "impurity_count = " << meta.impurities.count() << "\n";
  for (int i = 0; i < meta.impurities.count(); ++i) {
    const auto& imp = meta.impurities.impurities[i];
    os << "impurity_" << i << " = " << fmt(imp.x_nm) << " " << fmt(imp.y_nm) << " "
       << fmt(imp.strength_eVnm2) << "\n";
  }
}

ImageMeta read_sidecar(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_sidecar: cannot open " + path.string());
  ImageMeta meta;
  std::string line;
  int imp_count = 0;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    std::istringstream val(line.substr(eq + 1));
    if (key == "seed") val >> meta.seed;
    else if (key == "m_eff") val >> meta.model.m_eff;
    else if (key == "mu_eV") val >> meta.model.mu_eV;
    else if (key == "omega_eV") val >> meta.model.omega_eV;
    else if (key == "eta_eV") val >> meta.model.eta_eV;
    else if (key == "cutoff_nm") val >> meta.model.cutoff_nm;
    else if (key == "extent_w_nm") val >> meta.extent_w_nm;
    else if (key == "extent_h_nm") val >> meta.extent_h_nm;
    else if (key == "ldos_min") val >> meta.ldos_min;
    else if (key == "ldos_max") val >> meta.ldos_max;
    else if (key == "impurity_count") val >> imp_count;
    else if (key.rfind("impurity_", 0) == 0) {
      stm::Impurity imp;
      val >> imp.x_nm >> imp.y_nm >> imp.strength_eVnm2;
      meta.impurities.impurities.push_back(imp);
    }
  }
  if (meta.impurities.count() != imp_count)
    throw std::runtime_error("read_sidecar: impurity list inconsistent in " + path.string());
  return meta;
}

} // namespace pdanet::io
