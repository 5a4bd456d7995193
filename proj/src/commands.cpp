#include "pdanet/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include <Eigen/Dense>
#include <omp.h>

#include "pdanet/data_pipeline.hpp"
#include "pdanet/degradation.hpp"
#include "pdanet/hashing.hpp"
#include "pdanet/quality_metrics.hpp"
#include "pdanet/raster_io.hpp"
#include "pdanet/stm_physics.hpp"
#include "pdanet/trainer.hpp"

namespace pdanet::cmd {

namespace fs = std::filesystem;

namespace {

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p))
    throw std::invalid_argument(std::string(what) + " directory missing: " + p.string());
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p))
    throw std::invalid_argument(std::string(what) + " file missing: " + p.string());
}

stm::SceneConfig scene_from(const config::RunConfig& cfg) {
  stm::SceneConfig scene;
  scene.grid.height = scene.grid.width = cfg.get_int("physics.grid");
  scene.grid.extent_w_nm = scene.grid.extent_h_nm = cfg.get_double("physics.fov_nm");
  scene.model.m_eff = cfg.get_double("physics.m_eff");
  scene.model.mu_eV = cfg.get_double("physics.mu_eV");
  scene.model.omega_eV = cfg.get_double("physics.omega_eV");
  scene.model.eta_eV = cfg.get_double("physics.eta_eV");
  scene.model.cutoff_nm = cfg.get_double("physics.cutoff_nm");
  scene.impurity_count_min = cfg.get_int("physics.impurity_min");
  scene.impurity_count_max = cfg.get_int("physics.impurity_max");
  scene.strength_min_eVnm2 = cfg.get_double("physics.strength_min");
  scene.strength_max_eVnm2 = cfg.get_double("physics.strength_max");
  scene.margin_nm = cfg.get_double("physics.margin_nm");
  return scene;
}

degrade::DegradationConfig degrade_from(const config::RunConfig& cfg,
                                        const std::string& prefix) {
  degrade::DegradationConfig d;
  d.blur_sigma_px = cfg.get_double(prefix + ".blur_sigma_px");
  d.noise_sigma = cfg.get_double(prefix + ".noise_sigma");
  d.line_amp = cfg.get_double(prefix + ".line_amp");
  d.drift_shear_px = cfg.get_double(prefix + ".drift_shear_px");
  return d;
}

metrics::PiqeConfig piqe_from(const config::RunConfig& cfg) {
  metrics::PiqeConfig p;
  p.block_size = cfg.get_int("metrics.piqe.block_size");
  p.activity_threshold = cfg.get_double("metrics.piqe.activity_threshold");
  p.segment_threshold = cfg.get_double("metrics.piqe.segment_threshold");
  p.segment_length = cfg.get_int("metrics.piqe.segment_length");
  p.noise_dispersion = cfg.get_double("metrics.piqe.noise_dispersion");
  return p;
}

metrics::SsimConfig ssim_from(const config::RunConfig& cfg) {
  metrics::SsimConfig s;
  s.window = cfg.get_int("metrics.ssim.window");
  s.sigma = cfg.get_double("metrics.ssim.sigma");
  return s;
}

train::TrainConfig train_from(const config::RunConfig& cfg) {
  train::TrainConfig t;
  t.lr = cfg.get_double("train.lr");
  t.beta1 = cfg.get_double("train.beta1");
  t.beta2 = cfg.get_double("train.beta2");
  t.adam_eps = cfg.get_double("train.adam_eps");
  t.epochs = cfg.get_int("train.epochs");
  t.batch = cfg.get_int("data.batch");
  t.image_size = cfg.get_int("data.resolution");
  t.channels_base = cfg.get_int("train.channels_base");
  t.disc_channels = cfg.get_int("train.disc_channels");
  t.weights.lambda_d = cfg.get_double("train.lambda_d");
  t.weights.lambda_b = cfg.get_double("train.lambda_b");
  t.weights.lambda_cyc = cfg.get_double("train.lambda_cyc");
  t.weights.lambda_da = cfg.get_double("train.lambda_da");
  t.weights.lambda_fa = cfg.get_double("train.lambda_fa");
  t.share_up = cfg.get_bool("train.share_up");
  const auto mode = cfg.get_string("train.gen_mode");
  if (mode == "saturating")
    t.gen_mode = objectives::GeneratorLossMode::Saturating;
  else if (mode == "non_saturating")
    t.gen_mode = objectives::GeneratorLossMode::NonSaturating;
  else
    throw std::invalid_argument("config: train.gen_mode must be saturating|non_saturating");
  t.seed = cfg.get_u64("seed");
  t.checkpoint_every_epochs = cfg.get_int("train.checkpoint_every_epochs");
  t.converge_rel = cfg.get_double("train.converge_rel");
  t.converge_patience = cfg.get_int("train.converge_patience");
  t.validate();
  return t;
}

void write_provenance(const fs::path& out_dir, const config::RunConfig& cfg,
                      const std::string& command,
                      const std::vector<std::pair<std::string, fs::path>>& inputs) {
  std::ofstream os(out_dir / "provenance.txt");
  os << "tool = " << kVersion << "\n";
  os << "command = " << command << "\n";
  os << "seed = " << cfg.get_u64("seed") << "\n";
  const auto echo = cfg.echo();
  os << "config_hash = " << hex64(fnv1a64(echo.data(), echo.size())) << "\n";
  for (const auto& [name, path] : inputs) {
    const auto h = fs::is_directory(path) ? dir_hash(path) : file_hash(path);
    os << "input." << name << " = " << hex64(h) << "\n";
  }
}

std::string image_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%05d", index);
  return buf;
}

// manifest entries of one directory, sorted by id for stable join order
std::vector<data::ManifestEntry> sorted_manifest(const fs::path& dir) {
  require_dir(dir, "dataset");
  require_file(dir / "manifest.tsv", "manifest");
  auto entries = data::read_manifest(dir / "manifest.tsv");
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return entries;
}

} // namespace

void configure_threads(const config::RunConfig& cfg) {
  int threads = cfg.get_int("train.threads");
  if (threads <= 0)
    threads = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
  omp_set_num_threads(threads);
}

void run_simulate(const config::RunConfig& cfg, const fs::path& out_dir, int count,
                  const std::string& split, bool preview) {
  if (count < 1) throw std::invalid_argument("simulate: count must be >= 1");
  if (split != "train" && split != "test")
    throw std::invalid_argument("simulate: split must be train|test");
  auto scene = scene_from(cfg);
  scene.model.validate(); // surfaces invalid physics (e.g. mu <= -omega) as exit 2

  fs::create_directories(out_dir / "images");
  // split enters the seed stream so train and test scenes are disjoint
  const std::uint64_t master = cfg.get_u64("seed");
  const std::uint64_t stream_seed = derive_seed(master, split == "train" ? 100 : 200);

  stm::DatasetStats stats;
  auto images = stm::generate_clear_dataset(count, scene, stream_seed, &stats);

  std::vector<data::ManifestEntry> manifest;
  for (int i = 0; i < count; ++i) {
    const std::string id = split + "_" + image_name(i);
    const std::string rel = "images/" + id + ".ldos";
    io::write_raster(out_dir / rel, images[i].image);
    io::ImageMeta meta;
    meta.seed = images[i].seed;
    meta.model = scene.model;
    meta.extent_w_nm = scene.grid.extent_w_nm;
    meta.extent_h_nm = scene.grid.extent_h_nm;
    meta.ldos_min = images[i].ldos_min;
    meta.ldos_max = images[i].ldos_max;
    meta.impurities = images[i].impurities;
    io::write_sidecar(out_dir / ("images/" + id + ".meta.txt"), meta);
    if (preview) io::write_png16(out_dir / ("images/" + id + ".png"), images[i].image);
    manifest.push_back({id, rel, data::DomainTag::SimClear, split});
  }
  data::write_manifest(out_dir / "manifest.tsv", manifest);
  cfg.write_echo(out_dir / "config.echo");
  write_provenance(out_dir, cfg, "simulate", {});
  if (stats.skipped > 0) {
    std::ofstream log(out_dir / "runlog.txt");
    log << "skipped " << stats.skipped << " degenerate scenes while generating " << count
        << " images\n";
  }
}

void run_degrade(const config::RunConfig& cfg, const fs::path& in_dir,
                 const fs::path& out_dir, const std::string& domain) {
  const auto tag = data::domain_from_string(domain);
  if (tag == data::DomainTag::SimClear)
    throw std::invalid_argument("degrade: target domain must be SIM_BLUR or EXP");
  const auto entries = sorted_manifest(in_dir);
  const auto base = degrade_from(
      cfg, tag == data::DomainTag::SimBlur ? "degrade" : "degrade.pseudo_exp");
  const std::uint64_t master = cfg.get_u64("seed");

  fs::create_directories(out_dir / "images");
  std::vector<data::ManifestEntry> manifest;
  for (const auto& e : entries) {
    auto img = io::read_raster(in_dir / e.path);
    auto d = base;
    // seed is a pure function of (master seed, target domain, image id)
    d.seed = derive_seed(master, 300 + static_cast<int>(tag),
                         fnv1a64(e.id.data(), e.id.size()));
    const auto degraded = degrade::degrade(img, d);
    const std::string rel = "images/" + e.id + ".ldos";
    io::write_raster(out_dir / rel, degraded);
    manifest.push_back({e.id, rel, tag, e.split});
  }
  data::write_manifest(out_dir / "manifest.tsv", manifest);
  cfg.write_echo(out_dir / "config.echo");
  write_provenance(out_dir, cfg, "degrade", {{"source", in_dir}});
}

void run_train(const config::RunConfig& cfg, const fs::path& clear_dir,
               const fs::path& blur_dir, const fs::path& exp_dir, const fs::path& out_dir) {
  auto tcfg = train_from(cfg);
  auto clear = data::DomainDataset::load(clear_dir / "manifest.tsv",
                                         data::DomainTag::SimClear, "train");
  auto blur =
      data::DomainDataset::load(blur_dir / "manifest.tsv", data::DomainTag::SimBlur, "train");
  auto exp =
      data::DomainDataset::load(exp_dir / "manifest.tsv", data::DomainTag::Exp, "train");
  for (const auto* ds : {&clear, &blur, &exp})
    if (ds->height() != tcfg.image_size || ds->width() != tcfg.image_size)
      throw std::invalid_argument("train: dataset resolution " +
                                  std::to_string(ds->height()) +
                                  " does not match data.resolution");

  fs::create_directories(out_dir);
  cfg.write_echo(out_dir / "config.echo");
  write_provenance(out_dir, cfg, "train",
                   {{"clear", clear_dir}, {"blur", blur_dir}, {"exp", exp_dir}});

  train::TrainState state(tcfg);
  train::train(state, blur, clear, exp, out_dir);
}

void run_denoise(const config::RunConfig& cfg, const fs::path& checkpoint,
                 const fs::path& in_dir, const std::string& which, const fs::path& out_dir,
                 bool preview) {
  require_file(checkpoint, "checkpoint");
  if (which != "GD" && which != "GDA")
    throw std::invalid_argument("denoise: --which must be GD or GDA");
  const auto entries = sorted_manifest(in_dir);

  auto state = train::load_checkpoint(checkpoint);
  std::vector<ScalarField2D> images;
  for (const auto& e : entries) images.push_back(io::read_raster(in_dir / e.path));
  auto denoised = train::denoise(
      state, which == "GD" ? train::Denoiser::GD : train::Denoiser::GDA, images);

  fs::create_directories(out_dir / "images");
  std::vector<data::ManifestEntry> manifest;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string rel = "images/" + entries[i].id + ".ldos";
    io::write_raster(out_dir / rel, denoised[i]);
    if (preview) io::write_png16(out_dir / ("images/" + entries[i].id + ".png"), denoised[i]);
    manifest.push_back({entries[i].id, rel, entries[i].domain, entries[i].split});
  }
  data::write_manifest(out_dir / "manifest.tsv", manifest);
  cfg.write_echo(out_dir / "config.echo");
  write_provenance(out_dir, cfg, "denoise",
                   {{"checkpoint", checkpoint}, {"source", in_dir}});
}

void run_evaluate(const config::RunConfig& cfg, const fs::path& in_dir,
                  const fs::path& ref_dir, const fs::path& out_dir) {
  const auto entries = sorted_manifest(in_dir);
  std::vector<ScalarField2D> images;
  std::vector<std::string> ids;
  for (const auto& e : entries) {
    images.push_back(io::read_raster(in_dir / e.path));
    ids.push_back(e.id);
  }

  metrics::MetricReport report;
  if (!ref_dir.empty()) {
    const auto ref_entries = sorted_manifest(ref_dir);
    std::map<std::string, std::string> ref_paths;
    for (const auto& e : ref_entries) ref_paths[e.id] = e.path;
    std::vector<ScalarField2D> refs;
    for (const auto& id : ids) {
      auto it = ref_paths.find(id);
      if (it == ref_paths.end())
        throw std::invalid_argument("evaluate: reference set is missing id " + id);
      refs.push_back(io::read_raster(ref_dir / it->second));
    }
    report = metrics::evaluate_suite(images, ids, &refs, ssim_from(cfg), piqe_from(cfg));
  } else {
    metrics::BrisqueModel model;
    const auto model_path = cfg.get_string("metrics.brisque.model");
    if (model_path.empty())
      model = metrics::reference_brisque_model();
    else
      model = metrics::load_brisque_model(model_path);
    report = metrics::evaluate_suite(images, ids, nullptr, ssim_from(cfg), piqe_from(cfg),
                                     &model);
  }

  fs::create_directories(out_dir);
  metrics::write_report(out_dir / "report.tsv", out_dir / "records.jsonl", report);
  cfg.write_echo(out_dir / "config.echo");
  std::vector<std::pair<std::string, fs::path>> inputs{{"denoised", in_dir}};
  if (!ref_dir.empty()) inputs.emplace_back("reference", ref_dir);
  write_provenance(out_dir, cfg, "evaluate", inputs);
}

void run_ablate(const config::RunConfig& cfg, const fs::path& workdir) {
  fs::create_directories(workdir);
  const int train_count = cfg.get_int("data.train_count");
  const int test_count = cfg.get_int("data.test_count");

  // shared datasets for all variants
  const auto d = workdir / "data";
  run_simulate(cfg, d / "sim_clear_train", train_count, "train", false);
  run_simulate(cfg, d / "sim_clear_test", test_count, "test", false);
  run_degrade(cfg, d / "sim_clear_train", d / "sim_blur_train", "SIM_BLUR");
  run_degrade(cfg, d / "sim_clear_test", d / "sim_blur_test", "SIM_BLUR");
  run_degrade(cfg, d / "sim_clear_train", d / "exp_train", "EXP");
  run_degrade(cfg, d / "sim_clear_test", d / "exp_test", "EXP");

  // one code path for all rows: weight zeros plus the sharing switch
  struct Variant {
    const char* name;
    const char* lambda_da;
    const char* lambda_fa;
    const char* share;
    const char* exp_generator;
  };
  const Variant variants[] = {
      {"CycleGAN", "0", "0", "false", "GD"}, // no adapted generator; G_D denoises EXP
      {"CycleGAN+DA", "1", "0", "false", "GDA"},
      {"CycleGAN+DA+WS", "1", "0", "true", "GDA"},
      {"PDA-Net", "1", "0.1", "true", "GDA"},
  };

  struct RowResult {
    std::string name;
    metrics::MetricReport sim, exp;
  };
  std::vector<RowResult> rows;

  for (const auto& v : variants) {
    config::RunConfig vcfg = cfg;
    vcfg.set("train.lambda_da", v.lambda_da);
    vcfg.set("train.lambda_fa", v.lambda_fa);
    vcfg.set("train.share_up", v.share);

    const fs::path run = workdir / "runs" / v.name;
    run_train(vcfg, d / "sim_clear_train", d / "sim_blur_train", d / "exp_train", run);

    const fs::path den_sim = workdir / "out" / (std::string(v.name) + "_sim");
    const fs::path den_exp = workdir / "out" / (std::string(v.name) + "_exp");
    run_denoise(vcfg, run / "checkpoint.bin", d / "sim_blur_test", "GD", den_sim);
    run_denoise(vcfg, run / "checkpoint.bin", d / "exp_test", v.exp_generator, den_exp);

    const fs::path eval_sim = workdir / "eval" / (std::string(v.name) + "_sim");
    const fs::path eval_exp = workdir / "eval" / (std::string(v.name) + "_exp");
    run_evaluate(vcfg, den_sim, d / "sim_clear_test", eval_sim);
    run_evaluate(vcfg, den_exp, fs::path(), eval_exp);

    RowResult row;
    row.name = v.name;
    // recompute the aggregates in-process for the combined table
    {
      auto entries = sorted_manifest(den_sim);
      std::vector<ScalarField2D> images, refs;
      std::vector<std::string> ids;
      auto ref_entries = sorted_manifest(d / "sim_clear_test");
      std::map<std::string, std::string> ref_paths;
      for (const auto& e : ref_entries) ref_paths[e.id] = e.path;
      for (const auto& e : entries) {
        images.push_back(io::read_raster(den_sim / e.path));
        refs.push_back(io::read_raster(d / "sim_clear_test" / ref_paths.at(e.id)));
        ids.push_back(e.id);
      }
      row.sim = metrics::evaluate_suite(images, ids, &refs, ssim_from(cfg), piqe_from(cfg));
    }
    {
      auto entries = sorted_manifest(den_exp);
      std::vector<ScalarField2D> images;
      std::vector<std::string> ids;
      for (const auto& e : entries) {
        images.push_back(io::read_raster(den_exp / e.path));
        ids.push_back(e.id);
      }
      auto model = metrics::reference_brisque_model();
      row.exp = metrics::evaluate_suite(images, ids, nullptr, ssim_from(cfg),
                                        piqe_from(cfg), &model);
    }
    rows.push_back(std::move(row));
  }

  std::ofstream table(workdir / "ablation.tsv");
  table << "variant\tMSE\tPSNR\tSSIM\tBRISQUE\tPIQE\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\n", r.name.c_str(),
                  r.sim.mean_mse, r.sim.mean_psnr, r.sim.mean_ssim, r.exp.mean_brisque,
                  r.exp.mean_piqe);
    table << buf;
  }
  cfg.write_echo(workdir / "config.echo");
  write_provenance(workdir, cfg, "ablate", {});
}

namespace {

// Rebuilds the reference model from scratch: mean feature anchors of seeded
// clean corpora at 64 and 128 px under a pure-blur ladder and a combined
// degradation ladder, alphas from a ridge-regularized kernel solve with the
// far field pinned at 85.
metrics::BrisqueModel calibrate_brisque_model() {
  using Feats = std::array<double, 36>;
  struct Level {
    bool pure_blur;
    double sigma;
    degrade::DegradationConfig cfg;
    double target;
  };
  auto combined = [](double b, double n, double l, double s) {
    degrade::DegradationConfig c;
    c.blur_sigma_px = b;
    c.noise_sigma = n;
    c.line_amp = l;
    c.drift_shear_px = s;
    return c;
  };
  std::vector<Level> levels;
  for (auto [s, t] : {std::pair{0.0, 20.0}, {0.75, 32.0}, {1.5, 44.0}, {2.5, 56.0},
                      {3.5, 68.0}})
    levels.push_back({true, s, {}, t});
  levels.push_back({false, 0, combined(0.75, 0.01, 0.0, 0.0), 35.0});
  levels.push_back({false, 0, combined(1.5, 0.03, 0.05, 2.0), 50.0});
  levels.push_back({false, 0, combined(2.5, 0.06, 0.08, 3.0), 65.0});
  levels.push_back({false, 0, combined(3.5, 0.12, 0.12, 4.0), 80.0});

  std::vector<Feats> anchors;
  std::vector<double> targets;
  Feats lo{}, hi{};
  lo.fill(1e300);
  hi.fill(-1e300);
  for (int res : {64, 128}) {
    stm::SceneConfig scene;
    scene.grid.height = scene.grid.width = res;
    scene.grid.extent_w_nm = scene.grid.extent_h_nm = 20.0;
    auto corpus = stm::generate_clear_dataset(20, scene, 20250101 + res);
    for (const auto& lvl : levels) {
      Feats mean{};
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        ScalarField2D img;
        if (lvl.pure_blur) {
          img = degrade::gaussian_blur(corpus[i].image, lvl.sigma);
        } else {
          auto c = lvl.cfg;
          c.seed = 1000 + 17 * i + static_cast<std::uint64_t>(lvl.target);
          img = degrade::degrade(corpus[i].image, c);
        }
        const auto f = metrics::brisque_features(img);
        for (int k = 0; k < 36; ++k) {
          mean[k] += f[k];
          lo[k] = std::min(lo[k], f[k]);
          hi[k] = std::max(hi[k], f[k]);
        }
      }
      for (int k = 0; k < 36; ++k) mean[k] /= static_cast<double>(corpus.size());
      anchors.push_back(mean);
      targets.push_back(lvl.target);
    }
  }
  for (int k = 0; k < 36; ++k) {
    const double pad = 0.25 * (hi[k] - lo[k]) + 1e-6;
    lo[k] -= pad;
    hi[k] += pad;
  }

  const int n = static_cast<int>(anchors.size());
  std::vector<Feats> sv(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 36; ++k)
      sv[i][k] = -1.0 + 2.0 * (anchors[i][k] - lo[k]) / (hi[k] - lo[k]);

  auto dist2 = [&](int i, int j) {
    double d2 = 0;
    for (int k = 0; k < 36; ++k) {
      const double d = sv[i][k] - sv[j][k];
      d2 += d * d;
    }
    return d2;
  };
  std::vector<double> d2s;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d2s.push_back(dist2(i, j));
  std::sort(d2s.begin(), d2s.end());
  const double gamma = 0.3 / d2s[d2s.size() / 4];

  const double far_field = 85.0;
  Eigen::MatrixXd kernel(n, n);
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) {
    t(i) = targets[i] - far_field;
    for (int j = 0; j < n; ++j) kernel(i, j) = std::exp(-gamma * dist2(i, j));
  }
  const Eigen::VectorXd alpha =
      (kernel + 0.03 * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(t);

  metrics::BrisqueModel m;
  m.gamma = gamma;
  m.rho = -far_field;
  m.feat_min = lo;
  m.feat_max = hi;
  for (int i = 0; i < n; ++i) {
    m.alphas.push_back(alpha(i));
    m.svs.push_back(sv[i]);
  }
  return m;
}

} // namespace

void run_brisque_model(const config::RunConfig& cfg, const fs::path& out_file,
                       bool calibrate) {
  (void)cfg;
  const auto model =
      calibrate ? calibrate_brisque_model() : metrics::reference_brisque_model();
  metrics::save_brisque_model(out_file, model);
}

} // namespace pdanet::cmd
