#include "pdanet/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pdanet/raster_io.hpp"
#include "pdanet/rng.hpp"

namespace pdanet::data {

std::string to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::SimClear: return "SIM_CLEAR";
    case DomainTag::SimBlur: return "SIM_BLUR";
    case DomainTag::Exp: return "EXP";
  }
  return "?";
}

DomainTag domain_from_string(const std::string& s) {
  if (s == "SIM_CLEAR") return DomainTag::SimClear;
  if (s == "SIM_BLUR") return DomainTag::SimBlur;
  if (s == "EXP") return DomainTag::Exp;
  throw std::invalid_argument("unknown domain tag: " + s);
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_manifest: cannot open " + path.string());
  for (const auto& e : entries)
    os << e.id << '\t' << e.path << '\t' << to_string(e.domain) << '\t' << e.split << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_manifest: cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    ManifestEntry e;
    std::string domain;
    if (!std::getline(row, e.id, '\t') || !std::getline(row, e.path, '\t') ||
        !std::getline(row, domain, '\t') || !std::getline(row, e.split, '\t'))
      throw std::runtime_error("read_manifest: malformed line in " + path.string());
    e.domain = domain_from_string(domain);
    entries.push_back(std::move(e));
  }
  return entries;
}

// --- augmentation -----------------------------------------------------------

namespace {

// The 8 dihedral variants: bit 0 = transpose, bit 1 = flip x, bit 2 = flip y.
ScalarField2D dihedral(const ScalarField2D& img, int variant) {
  const bool transpose = variant & 1, flip_x = variant & 2, flip_y = variant & 4;
  const int oh = transpose ? img.width : img.height;
  const int ow = transpose ? img.height : img.width;
  ScalarField2D out(oh, ow, img.extent_w_nm, img.extent_h_nm);
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) {
      int sr = transpose ? c : r;
      int sc = transpose ? r : c;
      if (flip_x) sc = img.width - 1 - sc;
      if (flip_y) sr = img.height - 1 - sr;
      out.at(r, c) = img.at(sr, sc);
    }
  return out;
}

double bilinear(const ScalarField2D& img, double y, double x) {
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, img.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * img.at(y0, x0) + fx * img.at(y0, x1)) +
         fy * ((1 - fx) * img.at(y1, x0) + fx * img.at(y1, x1));
}

ScalarField2D crop_resize(const ScalarField2D& img, int top, int left, int size) {
  ScalarField2D out(img.height, img.width, img.extent_w_nm, img.extent_h_nm);
  const double scale_y = static_cast<double>(size) / img.height;
  const double scale_x = static_cast<double>(size) / img.width;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      out.at(r, c) = bilinear(img, top + (r + 0.5) * scale_y - 0.5,
                              left + (c + 0.5) * scale_x - 0.5);
  return out;
}

} // namespace

std::vector<ScalarField2D> augment(const ScalarField2D& img, const AugmentSpec& spec,
                                   std::uint64_t seed) {
  int crop_size = spec.crop_size_px > 0
                      ? spec.crop_size_px
                      : static_cast<int>(std::lround(spec.crop_fraction *
                                                     std::min(img.height, img.width)));
  if (spec.crops_per_variant > 1 &&
      (crop_size < 2 || crop_size > std::min(img.height, img.width)))
    throw std::invalid_argument("augment: crop size exceeds the image");
  if (spec.crops_per_variant < 1)
    throw std::invalid_argument("augment: crops_per_variant must be >= 1");

  std::vector<int> variants;
  if (spec.flips && spec.rotations)
    for (int v = 0; v < 8; ++v) variants.push_back(v);
  else if (spec.flips)
    variants = {0, 2, 4, 6}; // identity + the three axis flips
  else if (spec.rotations)
    variants = {0, 3, 5, 6}; // identity + 90/180/270 rotations
  else
    variants = {0};

  std::vector<ScalarField2D> out;
  out.reserve(variants.size() * spec.crops_per_variant);
  int k = 0;
  for (int v : variants) {
    ScalarField2D base = v == 0 ? img : dihedral(img, v);
    for (int crop = 0; crop < spec.crops_per_variant; ++crop, ++k) {
      if (crop == 0) {
        out.push_back(base);
        continue;
      }
      Rng rng(derive_seed(seed, /*stream=*/2, k));
      const int top = static_cast<int>(rng.uniform_int(0, base.height - crop_size));
      const int left = static_cast<int>(rng.uniform_int(0, base.width - crop_size));
      out.push_back(crop_resize(base, top, left, crop_size));
    }
  }
  return out;
}

// --- normalization ------------------------------------------------------------

void normalize_into(const ScalarField2D& img, float* dst) {
  constexpr double slack = 1e-9;
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const double v = img.values[i];
    if (v < -slack || v > 1.0 + slack)
      throw std::invalid_argument("normalize: pixel outside [0,1]");
    dst[i] = static_cast<float>(2.0 * v - 1.0);
  }
}

ScalarField2D denormalize(const float* src, int h, int w) {
  ScalarField2D out(h, w);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = (static_cast<double>(src[i]) + 1.0) * 0.5;
  return out;
}

// --- batching ------------------------------------------------------------------

DomainDataset::DomainDataset(DomainTag tag, std::vector<ScalarField2D> images,
                             std::vector<std::string> ids)
    : tag_(tag), images_(std::move(images)), ids_(std::move(ids)) {
  if (images_.empty())
    throw std::runtime_error("DomainDataset: empty dataset for domain " + to_string(tag));
  if (images_.size() != ids_.size())
    throw std::invalid_argument("DomainDataset: ids/images size mismatch");
  height_ = images_[0].height;
  width_ = images_[0].width;
  for (const auto& img : images_)
    if (img.height != height_ || img.width != width_)
      throw std::invalid_argument("DomainDataset: mixed resolutions");
}

DomainDataset DomainDataset::load(const std::filesystem::path& manifest_path,
                                  DomainTag tag, const std::string& split) {
  const auto entries = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  std::vector<ScalarField2D> images;
  std::vector<std::string> ids;
  for (const auto& e : entries) {
    if (e.domain != tag || e.split != split) continue;
    images.push_back(io::read_raster(dir / e.path));
    ids.push_back(e.id);
  }
  return DomainDataset(tag, std::move(images), std::move(ids));
}

UnpairedLoader::UnpairedLoader(const DomainDataset& dataset, int batch, std::uint64_t seed)
    : dataset_(dataset), batch_(batch), seed_(seed) {
  if (batch < 1) throw std::invalid_argument("UnpairedLoader: batch must be >= 1");
  start_epoch(0);
}

void UnpairedLoader::start_epoch(int epoch) {
  order_.resize(dataset_.count());
  for (int i = 0; i < dataset_.count(); ++i) order_[i] = i;
  // Domain enters the seed derivation so same-seed streams of different
  // domains are independently shuffled (unpaired by construction).
  Rng rng(derive_seed(seed_, 3 + static_cast<std::uint64_t>(dataset_.domain()),
                      static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order_.begin(), order_.end());
  cursor_ = 0;
}

bool UnpairedLoader::next(ImageBatch& out) {
  if (cursor_ >= dataset_.count()) return false;
  const int n = std::min(batch_, dataset_.count() - cursor_);
  out.domain = dataset_.domain();
  out.tensor = nn::Tensor<float>(n, 1, dataset_.height(), dataset_.width());
  out.ids.clear();
  for (int i = 0; i < n; ++i) {
    const int idx = order_[cursor_ + i];
    normalize_into(dataset_.image(idx), out.tensor.plane_ptr(i, 0));
    out.ids.push_back(dataset_.id(idx));
  }
  cursor_ += n;
  return true;
}

int UnpairedLoader::batches_per_epoch() const { return dataset_.count() / batch_; }

} // namespace pdanet::data
