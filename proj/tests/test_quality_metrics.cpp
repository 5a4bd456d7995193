#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pdanet/degradation.hpp"
#include "pdanet/quality_metrics.hpp"
#include "pdanet/rng.hpp"
#include "pdanet/stm_physics.hpp"

using namespace pdanet;
using namespace pdanet::metrics;

namespace {

ScalarField2D random_image(int n, std::uint64_t seed) {
  ScalarField2D img(n, n);
  Rng rng(seed);
  for (double& v : img.values) v = rng.uniform();
  return img;
}

ScalarField2D constant_image(int n, double v) {
  ScalarField2D img(n, n);
  img.values.assign(img.size(), v);
  return img;
}

std::vector<stm::GeneratedImage> small_corpus(int count, int size, std::uint64_t seed) {
  stm::SceneConfig scene;
  scene.grid.height = scene.grid.width = size;
  scene.grid.extent_w_nm = scene.grid.extent_h_nm = 18.0;
  return stm::generate_clear_dataset(count, scene, seed);
}

} // namespace

TEST_CASE("mse: zero, unit offset, brute-force oracle") {
  auto x = random_image(8, 1);
  CHECK(mse(x, x) == 0.0);

  // +1 on the 8-bit scale everywhere
  ScalarField2D a = constant_image(2, 100.0 / 255.0);
  ScalarField2D b = constant_image(2, 101.0 / 255.0);
  CHECK(mse(a, b) == doctest::Approx(1.0).epsilon(1e-12));

  auto p = random_image(8, 2), q = random_image(8, 3);
  const auto gp = to_gray255(p), gq = to_gray255(q);
  double oracle = 0.0;
  for (std::size_t i = 0; i < gp.size(); ++i) oracle += (gp[i] - gq[i]) * (gp[i] - gq[i]);
  oracle /= gp.size();
  CHECK(mse(p, q) == doctest::Approx(oracle).epsilon(1e-9));

  CHECK_THROWS_AS(mse(p, random_image(9, 4)), std::invalid_argument);
}

TEST_CASE("psnr: closed form, endpoints, monotone in mse") {
  CHECK(psnr(1.0) == doctest::Approx(48.130804).epsilon(1e-6));
  CHECK(psnr(255.0 * 255.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isinf(psnr(0.0)));
  CHECK_THROWS_AS(psnr(-1.0), std::domain_error);
  double prev = psnr(0.5);
  for (double m : {1.0, 10.0, 100.0, 1000.0}) {
    CHECK(psnr(m) < prev);
    prev = psnr(m);
  }
}

TEST_CASE("ssim: identity, symmetry, constant-image closed form") {
  auto x = random_image(32, 5);
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-9));

  auto y = random_image(32, 6);
  CHECK(ssim(x, y) == doctest::Approx(ssim(y, x)).epsilon(1e-12));

  // constant images: variance terms collapse, luminance-only penalty remains
  const double va = 102.0, vb = 153.0;
  auto a = constant_image(16, va / 255.0);
  auto b = constant_image(16, vb / 255.0);
  const double c1 = 0.01 * 255 * 0.01 * 255;
  const double expected = (2 * va * vb + c1) / (va * va + vb * vb + c1);
  CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-9));

  CHECK_THROWS_AS(ssim(random_image(8, 7), random_image(8, 8)), std::invalid_argument);
}

TEST_CASE("aggd sampler round trip: fit recovers known parameters within 5%") {
  // Sample from the asymmetric generalized Gaussian by inverse-gamma
  // composition: |x| = beta_side * G^(1/alpha) with G ~ Gamma(1/alpha, 1),
  // side chosen with probability beta_l / (beta_l + beta_r).
  auto sample_gamma = [](Rng& rng, double shape) {
    // Marsaglia-Tsang for shape >= 1, boost via U^(1/a) otherwise
    double boost = 1.0;
    double a = shape;
    if (a < 1.0) {
      boost = std::pow(rng.uniform(), 1.0 / a);
      a += 1.0;
    }
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double xn, vn;
      do {
        xn = rng.normal();
        vn = 1.0 + c * xn;
      } while (vn <= 0.0);
      vn = vn * vn * vn;
      const double u = rng.uniform();
      if (u < 1.0 - 0.0331 * xn * xn * xn * xn) return boost * d * vn;
      if (std::log(u) < 0.5 * xn * xn + d * (1.0 - vn + std::log(vn))) return boost * d * vn;
    }
  };

  for (auto [alpha, sl, sr] : {std::tuple{0.8, 0.6, 1.1}, std::tuple{1.6, 1.0, 0.5}}) {
    Rng rng(99);
    const double conv = std::sqrt(std::tgamma(1.0 / alpha) / std::tgamma(3.0 / alpha));
    const double bl = sl * conv, br = sr * conv;
    std::vector<double> xs(100000);
    for (double& v : xs) {
      const double mag = std::pow(sample_gamma(rng, 1.0 / alpha), 1.0 / alpha);
      const bool left = rng.uniform() < bl / (bl + br);
      v = left ? -bl * mag : br * mag;
    }
    auto fit = fit_aggd(xs);
    CHECK(fit.alpha == doctest::Approx(alpha).epsilon(0.05));
    CHECK(fit.sigma_l == doctest::Approx(sl).epsilon(0.05));
    CHECK(fit.sigma_r == doctest::Approx(sr).epsilon(0.05));
  }
}

TEST_CASE("ggd fit: recovers the gaussian special case and flags degenerate input") {
  Rng rng(7);
  std::vector<double> xs(100000);
  for (double& v : xs) v = rng.normal(0.0, 0.8);
  auto fit = fit_ggd(xs);
  CHECK(fit.alpha == doctest::Approx(2.0).epsilon(0.05));
  CHECK(fit.sigma_sq == doctest::Approx(0.64).epsilon(0.05));

  std::vector<double> zeros(1000, 0.0);
  auto flat = fit_ggd(zeros);
  CHECK(std::isfinite(flat.alpha));
  CHECK(flat.sigma_sq == 0.0);
}

TEST_CASE("piqe: range, determinism, noise monotonicity on a seeded corpus") {
  for (int i = 0; i < 5; ++i) {
    auto img = random_image(64, 100 + i);
    const double s = piqe(img);
    CHECK(s >= 0.0);
    CHECK(s <= 100.0);
    CHECK(piqe(img) == s);
  }
  CHECK_THROWS_AS(piqe(constant_image(16, 0.5)), std::invalid_argument);

  auto corpus = small_corpus(16, 64, 11);
  int worse = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    degrade::DegradationConfig noisy;
    noisy.blur_sigma_px = 0.0;
    noisy.drift_shear_px = 0.0;
    noisy.line_amp = 0.0;
    noisy.noise_sigma = 0.12;
    noisy.seed = 500 + i;
    const double clean_score = piqe(corpus[i].image);
    const double noisy_score = piqe(degrade::degrade(corpus[i].image, noisy));
    worse += noisy_score > clean_score;
  }
  CHECK(worse * 10 >= static_cast<int>(corpus.size()) * 9); // >= 90%
}

TEST_CASE("brisque: constant input, determinism, model io, blur monotonicity") {
  // constant image: every fit degenerates but stays finite and stable
  auto flat_feats = brisque_features(constant_image(32, 0.5));
  auto flat_feats2 = brisque_features(constant_image(32, 0.5));
  for (int i = 0; i < 36; ++i) {
    CHECK(std::isfinite(flat_feats[i]));
    CHECK(flat_feats[i] == flat_feats2[i]);
  }

  const auto model = reference_brisque_model();
  auto img = random_image(64, 13);
  CHECK(brisque(img, model) == brisque(img, model));

  // model file round trip
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "pdanet_brisque_model";
  fs::create_directories(dir);
  save_brisque_model(dir / "ref.bin", model);
  auto loaded = load_brisque_model(dir / "ref.bin");
  CHECK(loaded.gamma == model.gamma);
  CHECK(loaded.rho == model.rho);
  CHECK(loaded.svs.size() == model.svs.size());
  CHECK(brisque(img, loaded) == brisque(img, model));
  CHECK_THROWS(load_brisque_model(dir / "missing.bin"));
  {
    std::ofstream bad(dir / "corrupt.bin", std::ios::binary);
    bad << "nope";
  }
  CHECK_THROWS(load_brisque_model(dir / "corrupt.bin"));
  fs::remove_all(dir);

  // increasing blur yields nondecreasing scores on >= 90% of the corpus
  auto corpus = small_corpus(16, 64, 21);
  int monotone = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    bool ok = true;
    double prev = -1e300;
    for (double sigma : {0.0, 1.0, 2.0, 3.0}) {
      auto blurred = degrade::gaussian_blur(corpus[i].image, sigma);
      const double s = brisque(blurred, model);
      if (s < prev - 1e-9) ok = false;
      prev = s;
    }
    monotone += ok;
  }
  CHECK(monotone * 10 >= static_cast<int>(corpus.size()) * 9);
}

TEST_CASE("evaluate_suite: column shapes and the identity case") {
  std::vector<ScalarField2D> imgs;
  for (int i = 0; i < 3; ++i) imgs.push_back(random_image(32, 30 + i));
  std::vector<std::string> ids{"a", "b", "c"};

  // denoised set equals the reference set
  auto report = evaluate_suite(imgs, ids, &imgs);
  CHECK(report.full_reference);
  CHECK(report.count == 3);
  CHECK(report.mean_mse == 0.0);
  CHECK(std::isinf(report.mean_psnr));
  CHECK(report.mean_ssim == doctest::Approx(1.0).epsilon(1e-9));

  // no-reference shape
  std::vector<ScalarField2D> big;
  for (int i = 0; i < 2; ++i) big.push_back(random_image(64, 40 + i));
  auto noref = evaluate_suite(big, {}, nullptr);
  CHECK_FALSE(noref.full_reference);
  CHECK(noref.rows[0].piqe >= 0.0);
  CHECK(std::isfinite(noref.rows[0].brisque));

  std::vector<ScalarField2D> wrong;
  wrong.push_back(random_image(32, 50));
  CHECK_THROWS_AS(evaluate_suite(imgs, ids, &wrong), std::invalid_argument);

  // report files
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "pdanet_report";
  fs::create_directories(dir);
  write_report(dir / "table.tsv", dir / "records.jsonl", report);
  CHECK(fs::exists(dir / "table.tsv"));
  CHECK(fs::exists(dir / "records.jsonl"));
  fs::remove_all(dir);
}
