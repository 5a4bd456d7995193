// End-to-end acceptance suite. Each numbered check prints one PASS/FAIL line
// and the binary exits nonzero if any check fails. Run through ctest as the
// `acceptance` test, or directly:  ./acceptance [workdir]

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pdanet/commands.hpp"
#include "pdanet/config.hpp"
#include "pdanet/constants.hpp"
#include "pdanet/data_pipeline.hpp"
#include "pdanet/degradation.hpp"
#include "pdanet/hashing.hpp"
#include "pdanet/nn/networks.hpp"
#include "pdanet/objectives.hpp"
#include "pdanet/quality_metrics.hpp"
#include "pdanet/raster_io.hpp"
#include "pdanet/rng.hpp"
#include "pdanet/stm_physics.hpp"
#include "pdanet/trainer.hpp"

namespace fs = std::filesystem;
using namespace pdanet;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed_s(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
void criterion_1_oracle_equivalence() {
  const auto t0 = Clock::now();
  stm::SurfaceModel m;
  m.omega_eV = 0.01;
  m.eta_eV = 0.05;
  stm::LatticeSpec lat{48, 48, 0.25};
  stm::ImpuritySet imps;
  imps.impurities.push_back({4.1, 5.3, 2.0});
  imps.impurities.push_back({7.6, 6.2, -1.5});

  const auto via_eig = stm::spectral_ldos_oracle(lat, imps, m);
  const auto via_inv = stm::lattice_ldos_resolvent(lat, imps, m);
  double max_rel = 0.0;
  for (std::size_t i = 0; i < via_eig.size(); ++i)
    max_rel = std::max(max_rel, std::abs(via_eig.values[i] - via_inv.values[i]) /
                                    std::abs(via_inv.values[i]));
  const double secs = elapsed_s(t0);
  report(1, "physics oracle equivalence (48x48, 2 impurities)",
         max_rel < 1e-8 && secs < 10.0,
         fmt("max rel err %.2e (< 1e-8), runtime %.1f s (< 10 s)", max_rel, secs));
}

// ---------------------------------------------------------------- criterion 2
void criterion_2_clean_dos() {
  stm::SurfaceModel m;
  m.omega_eV = 0.0;
  m.eta_eV = 0.001;
  stm::RasterSpec grid{64, 64, 20.0, 20.0, 0.0, 0.0};
  const auto field = stm::ldos_map(grid, stm::ImpuritySet{}, m);
  double mean = 0.0;
  for (double v : field.values) mean += v;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field.values) var += (v - mean) * (v - mean);
  const double rel_std = std::sqrt(var / static_cast<double>(field.size())) / mean;
  const double rho0 = 0.7936897944; // m_eff m_e/(2 pi hbar^2), hand-evaluated
  const bool pass = std::abs(mean - rho0) / rho0 < 0.02 && rel_std < 1e-6;
  report(2, "clean-gas DOS at eta = 1 meV", pass,
         fmt("mean %.5f vs rho0 %.5f (|d| %.2f%%), spatial rel std %.1e", mean, rho0,
             100.0 * std::abs(mean - rho0) / rho0, rel_std));
}

// ---------------------------------------------------------------- criterion 3
void criterion_3_friedel() {
  stm::SurfaceModel m; // mu = 0.45 eV, m_eff = 0.38 defaults
  m.omega_eV = 0.0;
  m.eta_eV = 0.002;
  stm::RasterSpec grid{256, 256, 20.0, 20.0, 0.0, 0.0};
  stm::ImpuritySet one;
  one.impurities.push_back({10.0, 10.0, 3.0});
  const auto field = stm::ldos_map(grid, one, m);

  // azimuthal profile -> Hann window -> zero-padded DFT -> parabolic peak
  const double dr = grid.extent_w_nm / grid.width;
  const int nbins = static_cast<int>(9.5 / dr);
  std::vector<double> sum(nbins, 0.0);
  std::vector<int> cnt(nbins, 0);
  for (int r = 0; r < field.height; ++r)
    for (int c = 0; c < field.width; ++c) {
      const double rr = std::hypot(field.x_of(c) - 10.0, field.y_of(r) - 10.0);
      const int b = static_cast<int>(rr / dr);
      if (b < nbins) {
        sum[b] += field.at(r, c);
        ++cnt[b];
      }
    }
  const int b0 = static_cast<int>(1.5 / dr);
  const int n = nbins - b0;
  std::vector<double> prof(n);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    prof[i] = sum[b0 + i] / cnt[b0 + i];
    mean += prof[i];
  }
  mean /= n;
  const int padded_n = 8 * n;
  std::vector<double> padded(padded_n, 0.0);
  for (int i = 0; i < n; ++i)
    padded[i] = (prof[i] - mean) * 0.5 * (1.0 - std::cos(2.0 * constants::pi * i / (n - 1)));
  std::vector<double> mag(padded_n / 2, 0.0);
  int peak = 1;
  for (int k = 1; k < padded_n / 2; ++k) {
    std::complex<double> acc(0, 0);
    for (int i = 0; i < padded_n; ++i)
      acc += padded[i] *
             std::exp(std::complex<double>(0, -2.0 * constants::pi * k * i / padded_n));
    mag[k] = std::abs(acc);
    if (mag[k] > mag[peak]) peak = k;
  }
  const double denom = mag[peak - 1] - 2 * mag[peak] + mag[peak + 1];
  const double shift = denom != 0 ? 0.5 * (mag[peak - 1] - mag[peak + 1]) / denom : 0.0;
  const double freq = 2.0 * constants::pi * (peak + shift) / (padded_n * dr);
  const double two_k = 4.237079206; // 2 sqrt(2 m_eff m_e mu)/hbar, hand-evaluated
  const double rel = std::abs(freq - two_k) / two_k;
  report(3, "Friedel oscillation frequency 2k", rel < 0.05,
         fmt("measured %.4f /nm vs 2k %.4f /nm (|d| %.2f%%, < 5%%)", freq, two_k, 100 * rel));
}

// ---------------------------------------------------------------- criterion 4
void criterion_4_gradients() {
  const auto t0 = Clock::now();
  using namespace pdanet::nn;
  using namespace pdanet::objectives;

  auto toy = [](std::uint64_t seed) {
    Rng init(seed);
    auto net = std::make_unique<Sequential<double>>();
    net->add(std::make_unique<Conv2d<double>>("t/c1", 1, 2, 3, 1, 1, init));
    net->add(std::make_unique<Tanh<double>>());
    net->add(std::make_unique<Conv2d<double>>("t/c2", 2, 1, 3, 1, 1, init));
    return DiscriminatorNet<double>(std::move(net));
  };
  auto rnd = [](int b, int h, int w, std::uint64_t seed) {
    Tensor<double> t(b, 1, h, w);
    Rng rng(seed);
    for (double& v : t.v) v = rng.uniform(-1.0, 1.0);
    return t;
  };
  auto max_rel_err = [](const std::vector<ParamPtr<double>>& params,
                        const std::function<double()>& value,
                        const std::function<void()>& backward) {
    for (auto& p : params) p->zero_grad();
    backward();
    double worst = 0.0;
    const double h = 1e-5;
    for (auto& p : params)
      for (std::size_t i = 0; i < p->size(); ++i) {
        const double x0 = p->value[i];
        p->value[i] = x0 + h;
        const double fp = value();
        p->value[i] = x0 - h;
        const double fm = value();
        p->value[i] = x0;
        const double num = (fp - fm) / (2 * h);
        worst = std::max(worst, std::abs(p->grad[i] - num) /
                                    std::max({std::abs(p->grad[i]), std::abs(num), 1e-6}));
      }
    return worst;
  };

  double worst = 0.0;

  { // adversarial discriminator loss
    auto d = toy(1);
    auto xr = rnd(2, 6, 6, 2), xf = rnd(2, 6, 6, 3);
    worst = std::max(
        worst,
        max_rel_err(
            d.params(),
            [&] { return adv_discriminator_loss(d.forward(xr, nullptr), d.forward(xf, nullptr)); },
            [&] {
              Ctx<double> cr, cf;
              auto sr = d.forward(xr, &cr);
              auto sf = d.forward(xf, &cf);
              Tensor<double> dr, df;
              adv_discriminator_loss(sr, sf, &dr, &df);
              d.backward(dr, cr);
              d.backward(df, cf);
            }));
  }
  for (auto mode : {GeneratorLossMode::Saturating, GeneratorLossMode::NonSaturating}) {
    // adversarial generator loss through a frozen critic
    auto g = toy(4);
    auto d = toy(5);
    auto x = rnd(2, 6, 6, 6);
    worst = std::max(
        worst, max_rel_err(
                   g.params(),
                   [&] { return adv_generator_loss(d.forward(g.forward(x, nullptr), nullptr), mode); },
                   [&] {
                     Ctx<double> cg, cd;
                     auto y = g.forward(x, &cg);
                     auto s = d.forward(y, &cd);
                     Tensor<double> ds;
                     adv_generator_loss(s, mode, &ds);
                     g.backward(d.backward(ds, cd), cg);
                   }));
  }
  { // cycle loss through two chained toy generators
    auto g1 = toy(7);
    auto g2 = toy(8);
    auto x = rnd(2, 6, 6, 9);
    std::vector<ParamPtr<double>> params = g1.params();
    for (auto& p : g2.params()) params.push_back(p);
    worst = std::max(
        worst,
        max_rel_err(
            params,
            [&] { return cycle_loss(x, g2.forward(g1.forward(x, nullptr), nullptr)); },
            [&] {
              Ctx<double> c1, c2;
              auto mid = g1.forward(x, &c1);
              auto rec = g2.forward(mid, &c2);
              Tensor<double> drec;
              cycle_loss(x, rec, &drec);
              g1.backward(g2.backward(drec, c2), c1);
            }));
  }
  { // feature alignment, classifier side and encoder side
    auto enc_e = toy(10), enc_s = toy(11), dfa = toy(12);
    auto xe = rnd(2, 6, 6, 13), xs = rnd(2, 6, 6, 14);
    worst = std::max(
        worst,
        max_rel_err(
            dfa.params(),
            [&] {
              return feature_alignment_loss(dfa.forward(enc_e.forward(xe, nullptr), nullptr),
                                            dfa.forward(enc_s.forward(xs, nullptr), nullptr));
            },
            [&] {
              Ctx<double> ce, cs;
              auto se = dfa.forward(enc_e.forward(xe, nullptr), &ce);
              auto ss = dfa.forward(enc_s.forward(xs, nullptr), &cs);
              Tensor<double> de, ds;
              feature_alignment_loss(se, ss, &de, &ds);
              dfa.backward(de, ce);
              dfa.backward(ds, cs);
            }));
    std::vector<ParamPtr<double>> enc_params = enc_e.params();
    for (auto& p : enc_s.params()) enc_params.push_back(p);
    worst = std::max(
        worst,
        max_rel_err(
            enc_params,
            [&] {
              return fa_generator_loss(dfa.forward(enc_e.forward(xe, nullptr), nullptr),
                                       dfa.forward(enc_s.forward(xs, nullptr), nullptr),
                                       GeneratorLossMode::NonSaturating);
            },
            [&] {
              Ctx<double> cee, ces, cde, cds;
              auto fe = enc_e.forward(xe, &cee);
              auto fsx = enc_s.forward(xs, &ces);
              auto se = dfa.forward(fe, &cde);
              auto ss = dfa.forward(fsx, &cds);
              Tensor<double> de, ds;
              fa_generator_loss(se, ss, GeneratorLossMode::NonSaturating, &de, &ds);
              enc_e.backward(dfa.backward(de, cde), cee);
              enc_s.backward(dfa.backward(ds, cds), ces);
            }));
  }
  const double secs = elapsed_s(t0);
  report(4, "analytic vs finite-difference gradients for every loss",
         worst < 1e-4 && secs < 60.0,
         fmt("worst rel err %.2e (< 1e-4), runtime %.1f s (< 60 s)", worst, secs));
}

// ------------------------------------------------------- criteria 5 and 6
void criteria_5_6_sharing_and_freeze(const fs::path& work) {
  using namespace pdanet::train;
  // desk-scale architecture (64x64, channels 32), reduced dataset so the
  // 200-step budget is reached quickly
  TrainConfig cfg;
  cfg.image_size = 64;
  cfg.channels_base = 32;
  cfg.batch = 2;
  cfg.epochs = 25; // 8 images / batch 2 = 4 steps per epoch -> wait, see below
  cfg.seed = 4243;
  cfg.checkpoint_every_epochs = 0;
  cfg.converge_patience = 1000000;

  auto make_domain = [&](data::DomainTag tag, std::uint64_t seed) {
    std::vector<ScalarField2D> imgs;
    std::vector<std::string> ids;
    for (int i = 0; i < 16; ++i) {
      ScalarField2D img(64, 64);
      Rng rng(derive_seed(seed, 60, i));
      for (double& v : img.values) v = rng.uniform();
      imgs.push_back(std::move(img));
      ids.push_back(data::to_string(tag) + std::to_string(i));
    }
    return data::DomainDataset(tag, std::move(imgs), std::move(ids));
  };
  auto blur = make_domain(data::DomainTag::SimBlur, 1);
  auto clear = make_domain(data::DomainTag::SimClear, 2);
  auto exp = make_domain(data::DomainTag::Exp, 3);
  // 16 images / batch 2 = 8 steps per epoch; 25 epochs = 200 steps

  TrainState state(cfg);
  long long steps = 0;
  double max_up_diff = 0.0;
  double max_frozen_gen_delta = 0.0, max_frozen_disc_delta = 0.0;
  std::vector<float> gen_snapshot, disc_snapshot;

  auto snapshot = [](const std::vector<nn::ParamPtr<float>>& ps) {
    std::vector<float> out;
    for (const auto& p : ps) out.insert(out.end(), p->value.begin(), p->value.end());
    return out;
  };

  PhaseProbe probe;
  probe.after_discriminator_phase = [&](const TrainState& st) {
    const auto now = snapshot(st.model.generator_params());
    for (std::size_t i = 0; i < now.size(); ++i)
      max_frozen_gen_delta =
          std::max(max_frozen_gen_delta, std::abs(double(now[i]) - double(gen_snapshot[i])));
    disc_snapshot = snapshot(st.model.discriminator_params());
  };
  probe.after_generator_phase = [&](const TrainState& st) {
    const auto now = snapshot(st.model.discriminator_params());
    for (std::size_t i = 0; i < now.size(); ++i)
      max_frozen_disc_delta =
          std::max(max_frozen_disc_delta, std::abs(double(now[i]) - double(disc_snapshot[i])));
    auto up_d = st.model.g_d.up_params();
    auto up_da = st.model.g_da.up_params();
    for (std::size_t i = 0; i < up_d.size(); ++i)
      for (std::size_t j = 0; j < up_d[i]->size(); ++j)
        max_up_diff = std::max(
            max_up_diff, std::abs(double(up_d[i]->value[j]) - double(up_da[i]->value[j])));
  };

  data::UnpairedLoader lb(blur, cfg.batch, cfg.seed), lc(clear, cfg.batch, cfg.seed),
      le(exp, cfg.batch, cfg.seed);
  for (int epoch = 0; epoch < cfg.epochs && steps < 200; ++epoch) {
    lb.start_epoch(epoch);
    lc.start_epoch(epoch);
    le.start_epoch(epoch);
    data::ImageBatch bb, bc, be;
    while (steps < 200 && lb.next(bb) && lc.next(bc) && le.next(be)) {
      gen_snapshot = snapshot(state.model.generator_params());
      train_step(state, bb, bc, be, &probe);
      ++steps;
    }
  }

  report(5, "weight-sharing invariant over a 200-step desk-scale run",
         steps == 200 && max_up_diff == 0.0,
         fmt("%lld steps, max |G_D.up - G_DA.up| = %.1f (exactly 0 required)", steps,
             max_up_diff));
  report(6, "freeze discipline in every train_step phase",
         max_frozen_gen_delta == 0.0 && max_frozen_disc_delta == 0.0,
         fmt("max frozen-generator delta %.1f, max frozen-discriminator delta %.1f",
             max_frozen_gen_delta, max_frozen_disc_delta));

  // checkpoint aliasing survives a save/load cycle
  save_checkpoint(work / "c56.bin", state);
  auto loaded = load_checkpoint(work / "c56.bin");
  auto up_d = loaded.model.g_d.up_params();
  auto up_da = loaded.model.g_da.up_params();
  bool aliased = true;
  for (std::size_t i = 0; i < up_d.size(); ++i)
    if (up_d[i].get() != up_da[i].get()) aliased = false;
  if (!aliased) report(5, "checkpoint restores aliasing", false, "up stages reloaded as copies");
}

// ---------------------------------------------------------------- criterion 7
void criterion_7_desk_training(const fs::path& work) {
  const auto t0 = Clock::now();
  auto cfg = config::RunConfig::defaults();
  cfg.apply_preset("desk");
  cmd::configure_threads(cfg);

  const fs::path d = work / "desk";
  cmd::run_simulate(cfg, d / "sim_clear_train", 200, "train", false);
  cmd::run_simulate(cfg, d / "sim_clear_test", 200, "test", false);
  cmd::run_degrade(cfg, d / "sim_clear_train", d / "sim_blur_train", "SIM_BLUR");
  cmd::run_degrade(cfg, d / "sim_clear_test", d / "sim_blur_test", "SIM_BLUR");
  cmd::run_degrade(cfg, d / "sim_clear_train", d / "exp_train", "EXP");
  cmd::run_train(cfg, d / "sim_clear_train", d / "sim_blur_train", d / "exp_train",
                 d / "run");
  const double train_secs = elapsed_s(t0);

  // epoch-mean cycle loss, first vs last epoch
  std::vector<double> cyc_by_epoch;
  {
    auto state = train::load_checkpoint(d / "run" / "checkpoint.bin");
    std::ifstream hist(d / "run" / "history.tsv");
    std::string line;
    std::vector<double> cyc;
    while (std::getline(hist, line)) {
      double f = 0, b = 0;
      const auto fp = line.find("cyc_f=");
      const auto bp = line.find("cyc_b=");
      if (fp == std::string::npos || bp == std::string::npos) continue;
      f = std::stod(line.substr(fp + 6));
      b = std::stod(line.substr(bp + 6));
      cyc.push_back(f + b);
    }
    const std::size_t per_epoch = cyc.size() / 5;
    for (int e = 0; e < 5; ++e) {
      double m = 0;
      for (std::size_t s = 0; s < per_epoch; ++s) m += cyc[e * per_epoch + s];
      cyc_by_epoch.push_back(m / per_epoch);
    }
  }
  const double cyc_drop = 1.0 - cyc_by_epoch.back() / cyc_by_epoch.front();

  // held-out PSNR: G_D(test blur) vs clean, against the blurry baseline
  cmd::run_denoise(cfg, d / "run" / "checkpoint.bin", d / "sim_blur_test", "GD",
                   d / "denoised_test");
  auto mean_psnr_vs_clean = [&](const fs::path& dir) {
    auto entries = data::read_manifest(dir / "manifest.tsv");
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    auto refs = data::read_manifest(d / "sim_clear_test" / "manifest.tsv");
    std::map<std::string, std::string> ref_paths;
    for (const auto& e : refs) ref_paths[e.id] = e.path;
    double acc = 0;
    for (const auto& e : entries) {
      const auto img = io::read_raster(dir / e.path);
      const auto ref = io::read_raster(d / "sim_clear_test" / ref_paths.at(e.id));
      acc += metrics::psnr(metrics::mse(img, ref));
    }
    return acc / entries.size();
  };
  const double psnr_blurry = mean_psnr_vs_clean(d / "sim_blur_test");
  const double psnr_denoised = mean_psnr_vs_clean(d / "denoised_test");
  const double total_secs = elapsed_s(t0);

  const bool pass = train_secs < 1800.0 && cyc_drop >= 0.5 &&
                    psnr_denoised - psnr_blurry >= 1.0;
  report(7, "desk-scale training efficacy", pass,
         fmt("train %.0f s (< 1800), cyc epoch1 %.4f -> epoch5 %.4f (drop %.0f%%, >= 50%%), "
             "PSNR blurry %.2f dB -> denoised %.2f dB (+%.2f, >= +1); total %.0f s",
             train_secs, cyc_by_epoch.front(), cyc_by_epoch.back(), 100 * cyc_drop,
             psnr_blurry, psnr_denoised, psnr_denoised - psnr_blurry, total_secs));
}

// ---------------------------------------------------------------- criterion 8
void criterion_8_metric_correctness() {
  Rng rng(81);
  auto rand_img = [&](int n) {
    ScalarField2D img(n, n);
    for (double& v : img.values) v = rng.uniform();
    return img;
  };

  // brute-force oracles on 100 random pairs
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto a = rand_img(16), b = rand_img(16);
    const auto ga = metrics::to_gray255(a), gb = metrics::to_gray255(b);
    double m_oracle = 0;
    for (std::size_t i = 0; i < ga.size(); ++i)
      m_oracle += (ga[i] - gb[i]) * (ga[i] - gb[i]);
    m_oracle /= ga.size();
    const double m = metrics::mse(a, b);
    worst = std::max(worst, std::abs(m - m_oracle) / std::max(m_oracle, 1e-12));
    const double p_oracle = 10.0 * std::log10(255.0 * 255.0 / m_oracle);
    worst = std::max(worst, std::abs(metrics::psnr(m) - p_oracle) / std::abs(p_oracle));
  }
  // ssim(x, x) = 1 and psnr closed form
  auto x = rand_img(32);
  const bool ssim_id = std::abs(metrics::ssim(x, x) - 1.0) < 1e-9;
  const bool psnr_exact = std::abs(metrics::psnr(1.0) - 48.1308) < 1e-4;

  // 50-image corpus monotonicity of the no-reference metrics under noise
  stm::SceneConfig scene;
  scene.grid.height = scene.grid.width = 64;
  scene.grid.extent_w_nm = scene.grid.extent_h_nm = 20.0;
  auto corpus = stm::generate_clear_dataset(50, scene, 31415);
  const auto model = metrics::reference_brisque_model();
  int piqe_mono = 0, brisque_mono = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    bool ok_p = true, ok_b = true;
    double prev_p = -1e300, prev_b = -1e300;
    for (double ns : {0.0, 0.04, 0.08, 0.12}) {
      degrade::DegradationConfig c;
      c.blur_sigma_px = 0;
      c.line_amp = 0;
      c.drift_shear_px = 0;
      c.noise_sigma = ns;
      c.seed = 97 * i + static_cast<std::uint64_t>(ns * 1000);
      const auto img = ns == 0.0 ? corpus[i].image : degrade::degrade(corpus[i].image, c);
      const double p = metrics::piqe(img);
      const double b = metrics::brisque(img, model);
      if (p < prev_p - 1e-9) ok_p = false;
      if (b < prev_b - 1e-9) ok_b = false;
      prev_p = p;
      prev_b = b;
    }
    piqe_mono += ok_p;
    brisque_mono += ok_b;
  }
  const bool pass = worst < 1e-6 && ssim_id && psnr_exact && piqe_mono >= 45 &&
                    brisque_mono >= 45;
  report(8, "metric correctness and no-reference monotonicity", pass,
         fmt("oracle rel err %.1e (< 1e-6), ssim(x,x)=1 %s, psnr(1)=48.1308 %s, "
             "piqe monotone %d/50, brisque monotone %d/50 (>= 45)",
             worst, ssim_id ? "ok" : "BAD", psnr_exact ? "ok" : "BAD", piqe_mono,
             brisque_mono));
}

// ---------------------------------------------------------------- criterion 9
void criterion_9_ablation_structure(const fs::path& work) {
  // The published Table I/II numbers (MSE 513.06 / PSNR 25.54 / SSIM 0.9332;
  // BRISQUE 52.99 / PIQE 56.80) are reference anchors only: they depend on
  // full-scale training data, an unpublished degradation model, and
  // unreleased experimental images. The structural gate is that the ablation
  // driver emits all four variant rows with every metric column populated.
  auto cfg = config::RunConfig::defaults();
  cfg.apply_preset("desk");
  cmd::configure_threads(cfg);
  // micro budget: the structure of the table is what is under test
  cfg.set("data.train_count", "8");
  cfg.set("data.test_count", "4");
  cfg.set("train.epochs", "1");
  cfg.set("data.batch", "4");

  const fs::path wd = work / "ablate";
  cmd::run_ablate(cfg, wd);

  std::ifstream table(wd / "ablation.tsv");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(table, line)) lines.push_back(line);

  bool pass = lines.size() == 5; // header + 4 variants
  int populated = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string variant;
    double v[5];
    row >> variant >> v[0] >> v[1] >> v[2] >> v[3] >> v[4];
    if (row && std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]) &&
        std::isfinite(v[3]) && std::isfinite(v[4]))
      ++populated;
  }
  pass = pass && populated == 4;
  report(9, "paper-number status + structural ablation table", pass,
         fmt("%zu rows, %d fully populated (4 required); Table I/II values documented as "
             "reference anchors only",
             lines.size() > 0 ? lines.size() - 1 : 0, populated));
}

// --------------------------------------------------------------- criterion 10
void criterion_10_determinism(const fs::path& work) {
  auto cfg = config::RunConfig::defaults();
  cfg.apply_preset("desk");
  cmd::configure_threads(cfg);
  cfg.set("data.train_count", "6");
  cfg.set("train.epochs", "1");
  cfg.set("data.batch", "2");

  const fs::path a = work / "det_a", b = work / "det_b";
  for (const auto& root : {a, b}) {
    cmd::run_simulate(cfg, root / "clear", 6, "train", true);
    cmd::run_degrade(cfg, root / "clear", root / "blur", "SIM_BLUR");
    cmd::run_degrade(cfg, root / "clear", root / "exp", "EXP");
    cmd::run_train(cfg, root / "clear", root / "blur", root / "exp", root / "run");
    cmd::run_denoise(cfg, root / "run" / "checkpoint.bin", root / "blur", "GD",
                     root / "den");
    cmd::run_evaluate(cfg, root / "den", root / "clear", root / "eval");
  }
  const bool datasets = dir_hash(a / "clear") == dir_hash(b / "clear") &&
                        dir_hash(a / "blur") == dir_hash(b / "blur") &&
                        dir_hash(a / "exp") == dir_hash(b / "exp");
  const bool history =
      file_hash(a / "run" / "history.tsv") == file_hash(b / "run" / "history.tsv") &&
      file_hash(a / "run" / "checkpoint.bin") == file_hash(b / "run" / "checkpoint.bin");
  const bool reports = dir_hash(a / "den") == dir_hash(b / "den") &&
                       file_hash(a / "eval" / "report.tsv") ==
                           file_hash(b / "eval" / "report.tsv");
  report(10, "bitwise determinism of datasets, loss histories, and reports",
         datasets && history && reports,
         fmt("datasets %s, history+checkpoint %s, outputs+reports %s",
             datasets ? "identical" : "DIFFER", history ? "identical" : "DIFFER",
             reports ? "identical" : "DIFFER"));
}

} // namespace

int main(int argc, char** argv) {
  const fs::path work =
      argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "pdanet_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  std::printf("acceptance workdir: %s\n", work.string().c_str());

  criterion_1_oracle_equivalence();
  criterion_2_clean_dos();
  criterion_3_friedel();
  criterion_4_gradients();
  criteria_5_6_sharing_and_freeze(work);
  criterion_8_metric_correctness();
  criterion_9_ablation_structure(work);
  criterion_10_determinism(work);
  criterion_7_desk_training(work);

  std::printf("%s: %d failure(s)\n", g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
