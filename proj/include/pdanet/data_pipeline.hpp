#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pdanet/field2d.hpp"
#include "pdanet/nn/tensor.hpp"

// Dataset assembly for the three unpaired domains: manifests, deterministic
// augmentation, [0,1] <-> [-1,1] normalization, and per-domain shuffled
// batch streams.

namespace pdanet::data {

enum class DomainTag { SimClear, SimBlur, Exp };

std::string to_string(DomainTag tag);
DomainTag domain_from_string(const std::string& s);

struct ManifestEntry {
  std::string id;
  std::string path; // relative to the manifest's directory
  DomainTag domain = DomainTag::SimClear;
  std::string split; // "train" or "test"
};

// Line-delimited, tab-separated {id, path, domain, split}.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// --- augmentation -----------------------------------------------------------

struct AugmentSpec {
  bool flips = false;          // horizontal/vertical flips and 90-degree
  bool rotations = false;      // rotations; together the 8 dihedral variants
  int crops_per_variant = 1;   // crop 0 is the identity crop
  double crop_fraction = 0.85; // random crop side, as a fraction of the image
  int crop_size_px = 0;        // optional absolute crop size; 0 = use fraction
};

// Deterministic expansion of one source image. The output count is
// (#dihedral variants) * crops_per_variant; crops are resampled back to the
// source resolution. An identity spec returns the image unchanged.
std::vector<ScalarField2D> augment(const ScalarField2D& img, const AugmentSpec& spec,
                                   std::uint64_t seed);

// --- normalization ----------------------------------------------------------

// [0,1] -> [-1,1]; throws std::invalid_argument outside [0,1] (tiny float
// round-off is tolerated).
void normalize_into(const ScalarField2D& img, float* dst);
ScalarField2D denormalize(const float* src, int h, int w);

// --- batching ----------------------------------------------------------------

struct ImageBatch {
  nn::Tensor<float> tensor; // B x 1 x H x W in [-1, 1]
  DomainTag domain = DomainTag::SimClear;
  std::vector<std::string> ids;
};

// In-memory dataset of one domain, loaded up front (desk-scale corpora are
// small). Images must share a resolution.
class DomainDataset {
 public:
  DomainDataset(DomainTag tag, std::vector<ScalarField2D> images,
                std::vector<std::string> ids);

  static DomainDataset load(const std::filesystem::path& manifest_path, DomainTag tag,
                            const std::string& split);

  DomainTag domain() const { return tag_; }
  int count() const { return static_cast<int>(images_.size()); }
  int height() const { return height_; }
  int width() const { return width_; }
  const ScalarField2D& image(int i) const { return images_[i]; }
  const std::string& id(int i) const { return ids_[i]; }

 private:
  DomainTag tag_;
  std::vector<ScalarField2D> images_;
  std::vector<std::string> ids_;
  int height_ = 0, width_ = 0;
};

// Epoch-shuffled unpaired stream. The permutation is a pure function of
// (seed, domain, epoch), so two domains never correlate, resumption after a
// checkpoint is exact, and worker timing cannot change batch contents. A
// trailing partial batch is emitted, covering every image exactly once per
// epoch; trainers that need equal-sized batches consume batches_per_epoch().
class UnpairedLoader {
 public:
  UnpairedLoader(const DomainDataset& dataset, int batch, std::uint64_t seed);

  void start_epoch(int epoch);
  bool next(ImageBatch& out); // false at end of epoch
  int batches_per_epoch() const; // full batches only
  int batch_size() const { return batch_; }

 private:
  const DomainDataset& dataset_;
  int batch_;
  std::uint64_t seed_;
  std::vector<int> order_;
  int cursor_ = 0;
};

} // namespace pdanet::data
