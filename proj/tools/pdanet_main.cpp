#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdanet/commands.hpp"
#include "pdanet/config.hpp"

// Exit codes: 0 success, 2 usage/validation, 1 runtime failure.

namespace {

struct CommonOpts {
  std::string preset;
  std::string config_file;
  std::vector<std::string> overrides;
  std::string seed;
};

void add_common(CLI::App* app, CommonOpts& opts) {
  app->add_option("--preset", opts.preset, "configuration preset (desk|full)");
  app->add_option("--config", opts.config_file, "key = value configuration file");
  app->add_option("--set", opts.overrides, "override one key, e.g. --set train.epochs=3");
  app->add_option("--seed", opts.seed, "master seed (shorthand for --set seed=N)");
}

pdanet::config::RunConfig build_config(const CommonOpts& opts) {
  auto cfg = pdanet::config::RunConfig::defaults();
  if (!opts.preset.empty()) cfg.apply_preset(opts.preset);
  if (!opts.config_file.empty()) cfg.load_file(opts.config_file);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.seed.empty()) cfg.set("seed", opts.seed);
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDA-Net: physics-based STM image simulation and unsupervised GAN denoising"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* sim = app.add_subcommand("simulate", "generate clean simulated STM images");
  std::string sim_out, sim_split = "train";
  int sim_count = -1;
  bool sim_preview = false;
  sim->add_option("--out", sim_out, "output dataset directory")->required();
  sim->add_option("--count", sim_count, "number of images (default from data.*_count)");
  sim->add_option("--split", sim_split, "manifest split tag (train|test)");
  sim->add_flag("--preview", sim_preview, "also write 16-bit PNG previews");
  add_common(sim, opts);

  auto* deg = app.add_subcommand("degrade", "degrade a clean dataset into a blurry one");
  std::string deg_in, deg_out, deg_domain = "SIM_BLUR";
  deg->add_option("--in", deg_in, "input dataset directory")->required();
  deg->add_option("--out", deg_out, "output dataset directory")->required();
  deg->add_option("--domain", deg_domain, "target domain (SIM_BLUR|EXP)");
  add_common(deg, opts);

  auto* trn = app.add_subcommand("train", "train the denoising model bundle");
  std::string trn_clear, trn_blur, trn_exp, trn_out;
  trn->add_option("--clear", trn_clear, "clean simulated dataset dir")->required();
  trn->add_option("--blur", trn_blur, "simulated blurry dataset dir")->required();
  trn->add_option("--exp", trn_exp, "experimental dataset dir")->required();
  trn->add_option("--out", trn_out, "run directory")->required();
  add_common(trn, opts);

  auto* den = app.add_subcommand("denoise", "run a trained denoiser over a dataset");
  std::string den_ck, den_in, den_out, den_which = "GD";
  bool den_preview = false;
  den->add_option("--checkpoint", den_ck, "checkpoint file")->required();
  den->add_option("--in", den_in, "input dataset directory")->required();
  den->add_option("--which", den_which, "generator to apply (GD|GDA)");
  den->add_option("--out", den_out, "output dataset directory")->required();
  den->add_flag("--preview", den_preview, "also write 16-bit PNG previews");
  add_common(den, opts);

  auto* eva = app.add_subcommand("evaluate", "quality metrics over a dataset");
  std::string eva_in, eva_ref, eva_out;
  eva->add_option("--in", eva_in, "dataset to score")->required();
  eva->add_option("--ref", eva_ref, "reference dataset (enables MSE/PSNR/SSIM)");
  eva->add_option("--out", eva_out, "report directory")->required();
  add_common(eva, opts);

  auto* abl = app.add_subcommand("ablate", "four-variant ablation pipeline");
  std::string abl_work;
  abl->add_option("--workdir", abl_work, "working directory for all artifacts")->required();
  add_common(abl, opts);

  auto* bm = app.add_subcommand("brisque-model", "write the BRISQUE reference model file");
  std::string bm_out;
  bool bm_calibrate = false;
  bm->add_option("--out", bm_out, "output model file")->required();
  bm->add_flag("--calibrate", bm_calibrate, "regenerate anchors from seeded corpora");
  add_common(bm, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto cfg = build_config(opts);
    pdanet::cmd::configure_threads(cfg);
    if (sim->parsed()) {
      const int count = sim_count > 0 ? sim_count
                                      : cfg.get_int(sim_split == "test" ? "data.test_count"
                                                                        : "data.train_count");
      pdanet::cmd::run_simulate(cfg, sim_out, count, sim_split, sim_preview);
    } else if (deg->parsed()) {
      pdanet::cmd::run_degrade(cfg, deg_in, deg_out, deg_domain);
    } else if (trn->parsed()) {
      pdanet::cmd::run_train(cfg, trn_clear, trn_blur, trn_exp, trn_out);
    } else if (den->parsed()) {
      pdanet::cmd::run_denoise(cfg, den_ck, den_in, den_which, den_out, den_preview);
    } else if (eva->parsed()) {
      pdanet::cmd::run_evaluate(cfg, eva_in, eva_ref, eva_out);
    } else if (abl->parsed()) {
      pdanet::cmd::run_ablate(cfg, abl_work);
    } else if (bm->parsed()) {
      pdanet::cmd::run_brisque_model(cfg, bm_out, bm_calibrate);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "pdanet: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "pdanet: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pdanet: %s\n", e.what());
    return 1;
  }
  return 0;
}
