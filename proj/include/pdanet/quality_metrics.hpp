#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pdanet/field2d.hpp"

// Image quality assessment. Full-reference: MSE / PSNR / SSIM against a
// clean reference. No-reference: PIQE and BRISQUE from natural-scene
// statistics of MSCN coefficients. All metrics consume [0,1] images and
// quantize them to the 0-255 scale by rounding first, since PSNR is defined
// against the 8-bit peak.

namespace pdanet::metrics {

// round(clamp(v,0,1) * 255); the common entry point of every metric here.
std::vector<double> to_gray255(const ScalarField2D& img);

double mse(const ScalarField2D& a, const ScalarField2D& b);

// 10 log10(255^2 / mse); +infinity when mse == 0 (serialized as "inf").
double psnr(double mse_value);

struct SsimConfig {
  double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  int window = 11;
  double sigma = 1.5;
};

double ssim(const ScalarField2D& a, const ScalarField2D& b, const SsimConfig& cfg = {});

// --- natural scene statistics ------------------------------------------------

// Mean-subtracted contrast-normalized coefficients: (I - mu)/(sigma + 1)
// with a 7x7 Gaussian (sigma 7/6) local window, reflect-padded.
std::vector<double> mscn_map(const std::vector<double>& gray, int h, int w);

struct GgdFit {
  double alpha = 2.0;
  double sigma_sq = 0.0;
};
GgdFit fit_ggd(const std::vector<double>& x);

struct AggdFit {
  double alpha = 2.0;
  double sigma_l = 0.0;
  double sigma_r = 0.0;
  double mean_param = 0.0;
};
AggdFit fit_aggd(const std::vector<double>& x);

// --- PIQE ---------------------------------------------------------------------

struct PiqeConfig {
  int block_size = 16;
  double activity_threshold = 0.1;  // MSCN block variance below this = uniform
  double segment_threshold = 0.1;   // edge-segment std below this = blockiness
  int segment_length = 6;
  double noise_dispersion = 0.5;    // sub-block variance dispersion below this = noise
};

// Block-based perceptual quality: MSCN activity classification into uniform,
// noticeable-artifact, and noise blocks, pooled into [0,100], lower better.
double piqe(const ScalarField2D& img, const PiqeConfig& cfg = {});

// --- BRISQUE --------------------------------------------------------------------

// 36 features: per scale (original + half), GGD(alpha, sigma^2) of the MSCN
// map plus AGGD(alpha, mean, sigma_l^2, sigma_r^2) of the four orientation
// products; two scales stacked.
std::array<double, 36> brisque_features(const ScalarField2D& img);

// Support-vector regression over scaled features. Model file layout
// (little-endian): magic "BRSQ", u32 version, u32 kernel (0 = RBF),
// f64 gamma, f64 rho, u32 n_features, u32 n_sv, f64 min[n], f64 max[n],
// then n_sv x { f64 alpha, f64 sv[n] }. Features are scaled to [-1,1] over
// [min,max] before kernel evaluation. Scores are comparable only within one
// model file.
struct BrisqueModel {
  double gamma = 0.05;
  double rho = 0.0;
  std::array<double, 36> feat_min{};
  std::array<double, 36> feat_max{};
  std::vector<double> alphas;           // n_sv
  std::vector<std::array<double, 36>> svs;

  double score(const std::array<double, 36>& features) const;
};

void save_brisque_model(const std::filesystem::path& path, const BrisqueModel& model);
BrisqueModel load_brisque_model(const std::filesystem::path& path);

// The shipped reference model: a two-anchor RBF regressor whose anchors are
// mean feature vectors of a seeded clean LDOS corpus and a heavily degraded
// copy. Unclipped; typical outputs fall in (15, 85) for in-family images.
BrisqueModel reference_brisque_model();

double brisque(const ScalarField2D& img, const BrisqueModel& model);

// --- report --------------------------------------------------------------------

struct MetricRow {
  std::string id;
  double mse = 0, psnr = 0, ssim = 0, piqe = 0, brisque = 0;
};

struct MetricReport {
  bool full_reference = false; // MSE/PSNR/SSIM columns vs BRISQUE/PIQE columns
  std::vector<MetricRow> rows;
  double mean_mse = 0, mean_psnr = 0, mean_ssim = 0, mean_piqe = 0, mean_brisque = 0;
  int count = 0;
  std::string config_echo;
};

// Full-reference report when `reference` is provided (sizes must match);
// no-reference report otherwise.
MetricReport evaluate_suite(const std::vector<ScalarField2D>& images,
                            const std::vector<std::string>& ids,
                            const std::vector<ScalarField2D>* reference,
                            const SsimConfig& ssim_cfg = {}, const PiqeConfig& piqe_cfg = {},
                            const BrisqueModel* model = nullptr);

// human-readable table + line-delimited JSON records
void write_report(const std::filesystem::path& table_path,
                  const std::filesystem::path& records_path, const MetricReport& report);

} // namespace pdanet::metrics
