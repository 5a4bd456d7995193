#include "pdanet/trainer.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <unordered_map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pdanet/rng.hpp"

namespace pdanet::train {

using nn::Ctx;
using nn::GeneratorCtx;
using nn::Tensor;

void TrainConfig::validate() const {
  if (!(lr > 0)) throw std::invalid_argument("train config: lr must be > 0");
  if (beta1 < 0 || beta1 >= 1) throw std::invalid_argument("train config: beta1 in [0,1)");
  if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
  if (batch < 1) throw std::invalid_argument("train config: batch must be >= 1");
  if (image_size % 4 != 0)
    throw std::invalid_argument("train config: image size must be divisible by 4");
  if (weights.lambda_d < 0 || weights.lambda_b < 0 || weights.lambda_cyc < 0 ||
      weights.lambda_da < 0 || weights.lambda_fa < 0)
    throw std::invalid_argument("train config: loss weights must be >= 0");
}

ModelBundle build_model(int channels_base, int disc_channels, bool share_up,
                        std::uint64_t seed) {
  if (disc_channels <= 0) disc_channels = channels_base;
  nn::SharedUpHandle<float> shared;
  if (share_up)
    shared = nn::build_up_stage<float>("G_shared", channels_base, derive_seed(seed, 10));
  ModelBundle m{
      nn::build_generator<float>("G_D", channels_base, shared, derive_seed(seed, 11)),
      nn::build_generator<float>("G_B", channels_base, nullptr, derive_seed(seed, 12)),
      nn::build_generator<float>("G_DA", channels_base, shared, derive_seed(seed, 13)),
      nn::build_patchgan<float>("D_D", disc_channels, derive_seed(seed, 14)),
      nn::build_patchgan<float>("D_B", disc_channels, derive_seed(seed, 15)),
      nn::build_patchgan<float>("D_DA", disc_channels, derive_seed(seed, 16)),
      nn::build_feature_classifier<float>("D_FA", 4 * channels_base, derive_seed(seed, 17)),
      share_up};
  return m;
}

std::vector<nn::ParamPtr<float>> ModelBundle::generator_params() const {
  auto out = g_d.params();
  for (auto& p : g_b.params()) out.push_back(p);
  for (auto& p : g_da.params()) out.push_back(p);
  return out;
}

std::vector<nn::ParamPtr<float>> ModelBundle::discriminator_params() const {
  auto out = d_d.params();
  for (auto& p : d_b.params()) out.push_back(p);
  for (auto& p : d_da.params()) out.push_back(p);
  for (auto& p : d_fa.params()) out.push_back(p);
  return out;
}

std::vector<nn::ParamPtr<float>> ModelBundle::all_params() const {
  auto out = generator_params();
  for (auto& p : discriminator_params()) out.push_back(p);
  return out;
}

TrainState::TrainState(const TrainConfig& cfg)
    : model(build_model(cfg.channels_base, cfg.disc_channels, cfg.share_up, cfg.seed)),
      opt_d(model.discriminator_params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps),
      opt_g(model.generator_params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps),
      config(cfg) {
  cfg.validate();
}

namespace {

Tensor<float> scaled(const Tensor<float>& t, float s) {
  Tensor<float> out = t;
  for (float& v : out.v) v *= s;
  return out;
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

namespace {

LossReport train_step_impl(TrainState& state, const data::ImageBatch& blur,
                           const data::ImageBatch& clear, const data::ImageBatch& exp,
                           const PhaseProbe* probe) {
  const auto& w = state.config.weights;
  auto& m = state.model;

  LossReport report;
  report.generator_mode = objectives::to_string(state.config.gen_mode);

  const bool use_da = w.lambda_da > 0.0 || w.lambda_fa > 0.0;
  const bool use_fa = w.lambda_fa > 0.0;

  // ---- generate the synthetic batches, keeping generator contexts for phase 2
  GeneratorCtx<float> ctx_gd, ctx_gb, ctx_gda;
  auto out_d = m.g_d.forward(blur.tensor, &ctx_gd);   // I_BS -> (theta_D, I_BS^D)
  auto out_b = m.g_b.forward(clear.tensor, &ctx_gb);  // I_S  -> I_S^B
  nn::GeneratorOut<float> out_da;
  if (use_da) out_da = m.g_da.forward(exp.tensor, &ctx_gda); // I_E -> (theta_DA, I_E^D)

  // ---- phase 1: discriminators ascend total_D; generators frozen
  state.opt_d.zero_grad();
  {
    Ctx<float> cr, cf;
    auto s_real = m.d_d.forward(clear.tensor, &cr);
    auto s_fake = m.d_d.forward(out_d.output, &cf);
    Tensor<float> dr, df;
    report.d_d = objectives::adv_discriminator_loss(s_real, s_fake, &dr, &df);
    // descend -lambda * L: gradient scale is -lambda
    m.d_d.backward(scaled(dr, -static_cast<float>(w.lambda_d)), cr);
    m.d_d.backward(scaled(df, -static_cast<float>(w.lambda_d)), cf);
  }
  {
    Ctx<float> cr, cf;
    auto s_real = m.d_b.forward(blur.tensor, &cr);
    auto s_fake = m.d_b.forward(out_b.output, &cf);
    Tensor<float> dr, df;
    report.d_b = objectives::adv_discriminator_loss(s_real, s_fake, &dr, &df);
    m.d_b.backward(scaled(dr, -static_cast<float>(w.lambda_b)), cr);
    m.d_b.backward(scaled(df, -static_cast<float>(w.lambda_b)), cf);
  }
  if (use_da) {
    Ctx<float> cr, cf;
    auto s_real = m.d_da.forward(clear.tensor, &cr); // clear simulated images are the reference
    auto s_fake = m.d_da.forward(out_da.output, &cf);
    Tensor<float> dr, df;
    report.d_da = objectives::adv_discriminator_loss(s_real, s_fake, &dr, &df);
    m.d_da.backward(scaled(dr, -static_cast<float>(w.lambda_da)), cr);
    m.d_da.backward(scaled(df, -static_cast<float>(w.lambda_da)), cf);
  }
  if (use_fa) {
    Ctx<float> ce, cs;
    auto s_exp = m.d_fa.forward(out_da.features, &ce);
    auto s_sim = m.d_fa.forward(out_d.features, &cs);
    Tensor<float> de, ds;
    report.d_fa = objectives::feature_alignment_loss(s_exp, s_sim, &de, &ds);
    m.d_fa.backward(scaled(de, -static_cast<float>(w.lambda_fa)), ce);
    m.d_fa.backward(scaled(ds, -static_cast<float>(w.lambda_fa)), cs);
  }
  objectives::total_losses(report, w);
  if (!finite(report.total_d)) {
    report.finite = false;
    return report;
  }
  state.opt_d.step();
  if (probe && probe->after_discriminator_phase) probe->after_discriminator_phase(state);

  // ---- phase 2: generators descend total_G; discriminators frozen
  state.opt_g.zero_grad();

  // cycle translations
  GeneratorCtx<float> ctx_cyc_f, ctx_cyc_b;
  auto rec_blur = m.g_b.forward(out_d.output, &ctx_cyc_f);  // G_B(G_D(I_BS))
  auto rec_clear = m.g_d.forward(out_b.output, &ctx_cyc_b); // G_D(G_B(I_S))

  Tensor<float> d_rec_f, d_rec_b;
  report.cyc_f = objectives::cycle_loss(blur.tensor, rec_blur.output, &d_rec_f);
  report.cyc_b = objectives::cycle_loss(clear.tensor, rec_clear.output, &d_rec_b);

  // adversarial terms through the freshly updated discriminators
  Tensor<float> d_out_d, d_out_b, d_out_da;
  {
    Ctx<float> c;
    auto s = m.d_d.forward(out_d.output, &c);
    Tensor<float> ds;
    report.g_d = objectives::adv_generator_loss(s, state.config.gen_mode, &ds);
    d_out_d = m.d_d.backward(scaled(ds, static_cast<float>(w.lambda_d)), c);
  }
  {
    Ctx<float> c;
    auto s = m.d_b.forward(out_b.output, &c);
    Tensor<float> ds;
    report.g_b = objectives::adv_generator_loss(s, state.config.gen_mode, &ds);
    d_out_b = m.d_b.backward(scaled(ds, static_cast<float>(w.lambda_b)), c);
  }
  if (use_da && w.lambda_da > 0.0) {
    Ctx<float> c;
    auto s = m.d_da.forward(out_da.output, &c);
    Tensor<float> ds;
    report.g_da = objectives::adv_generator_loss(s, state.config.gen_mode, &ds);
    d_out_da = m.d_da.backward(scaled(ds, static_cast<float>(w.lambda_da)), c);
  }

  // feature alignment gradients for the two phi encoders
  Tensor<float> d_feat_d, d_feat_da;
  if (use_fa) {
    Ctx<float> ce, cs;
    auto s_exp = m.d_fa.forward(out_da.features, &ce);
    auto s_sim = m.d_fa.forward(out_d.features, &cs);
    Tensor<float> de, ds;
    report.fa_gen =
        objectives::fa_generator_loss(s_exp, s_sim, state.config.gen_mode, &de, &ds);
    d_feat_da = m.d_fa.backward(scaled(de, static_cast<float>(w.lambda_fa)), ce);
    d_feat_d = m.d_fa.backward(scaled(ds, static_cast<float>(w.lambda_fa)), cs);
  }

  // backprop the cycle translations first; they hand gradients to the
  // phase-0 generator outputs
  {
    // forward cycle: L1 on rec_blur, through G_B's second pass
    auto d_into_gd_out = m.g_b.backward(scaled(d_rec_f, static_cast<float>(w.lambda_cyc)),
                                        nullptr, ctx_cyc_f);
    if (d_out_d.size() == 0) d_out_d = Tensor<float>(out_d.output.b, out_d.output.c,
                                                     out_d.output.h, out_d.output.w);
    d_out_d += d_into_gd_out;
  }
  {
    // backward cycle: L1 on rec_clear, through G_D's second pass
    auto d_into_gb_out = m.g_d.backward(scaled(d_rec_b, static_cast<float>(w.lambda_cyc)),
                                        nullptr, ctx_cyc_b);
    if (d_out_b.size() == 0) d_out_b = Tensor<float>(out_b.output.b, out_b.output.c,
                                                     out_b.output.h, out_b.output.w);
    d_out_b += d_into_gb_out;
  }

  // finally the phase-0 passes, with feature-junction gradients where present
  m.g_d.backward(d_out_d, use_fa ? &d_feat_d : nullptr, ctx_gd);
  m.g_b.backward(d_out_b, nullptr, ctx_gb);
  if (use_da) {
    if (w.lambda_da > 0.0 && d_out_da.size() > 0) {
      m.g_da.backward(d_out_da, use_fa ? &d_feat_da : nullptr, ctx_gda);
    } else if (use_fa) {
      m.g_da.backward_features_only(d_feat_da, ctx_gda);
    }
  }

  objectives::total_losses(report, w);
  if (!finite(report.total_g)) {
    report.finite = false;
    return report;
  }
  state.opt_g.step();
  if (probe && probe->after_generator_phase) probe->after_generator_phase(state);

  ++state.global_step;
  return report;
}

} // namespace

LossReport train_step(TrainState& state, const data::ImageBatch& blur,
                      const data::ImageBatch& clear, const data::ImageBatch& exp,
                      const PhaseProbe* probe) {
  if (blur.tensor.b != clear.tensor.b || blur.tensor.b != exp.tensor.b)
    throw std::invalid_argument("train_step: domain batches must be the same size");
  try {
    return train_step_impl(state, blur, clear, exp, probe);
  } catch (const std::runtime_error&) {
    // non-finite scores surface as numeric errors from the loss layer
    LossReport aborted;
    aborted.generator_mode = objectives::to_string(state.config.gen_mode);
    aborted.finite = false;
    return aborted;
  }
}

TrainResult train(TrainState& state, const data::DomainDataset& blur,
                  const data::DomainDataset& clear, const data::DomainDataset& exp,
                  const std::filesystem::path& run_dir, const TrainCallbacks& cb) {
  state.config.validate();
  if (blur.count() == 0 || clear.count() == 0 || exp.count() == 0)
    throw std::runtime_error("train: all three domains need data");

  std::filesystem::create_directories(run_dir);
  const auto history_path = run_dir / "history.tsv";
  const auto runlog_path = run_dir / "runlog.txt";
  std::ofstream runlog(runlog_path, std::ios::app);

  data::UnpairedLoader blur_loader(blur, state.config.batch, state.config.seed);
  data::UnpairedLoader clear_loader(clear, state.config.batch, state.config.seed);
  data::UnpairedLoader exp_loader(exp, state.config.batch, state.config.seed);
  const int steps_per_epoch =
      std::min({blur_loader.batches_per_epoch(), clear_loader.batches_per_epoch(),
                exp_loader.batches_per_epoch()});
  if (steps_per_epoch == 0 && state.config.epochs > 0)
    throw std::runtime_error("train: batch size exceeds the smallest domain");

  TrainResult result;
  double best_epoch_g = 1e300;
  int stall = 0;

  for (; state.epoch < state.config.epochs; ) {
    blur_loader.start_epoch(state.epoch);
    clear_loader.start_epoch(state.epoch);
    exp_loader.start_epoch(state.epoch);

    double epoch_g = 0.0;
    data::ImageBatch bb, bc, be;
    for (int s = 0; s < steps_per_epoch; ++s) {
      blur_loader.next(bb);
      clear_loader.next(bc);
      exp_loader.next(be);
      LossReport rep = train_step(state, bb, bc, be);
      if (!rep.finite) {
        runlog << "step " << state.global_step << ": non-finite loss, step aborted\n";
        continue;
      }
      epoch_g += rep.total_g;
      state.history.push_back(rep);
      append_history(history_path, state.global_step, rep);
      if (cb.on_step) cb.on_step(state, rep);
    }
    epoch_g /= steps_per_epoch;
    ++state.epoch;
    ++result.epochs_run;
    runlog << "epoch " << state.epoch << ": mean total_G " << epoch_g << "\n";
    runlog.flush();
    if (cb.on_epoch) cb.on_epoch(state, epoch_g);

    if (state.config.checkpoint_every_epochs > 0 &&
        state.epoch % state.config.checkpoint_every_epochs == 0)
      save_checkpoint(run_dir / "checkpoint.bin", state);

    // convergence: relative improvement of the epoch-mean generator aggregate
    if (epoch_g < best_epoch_g - std::abs(best_epoch_g) * state.config.converge_rel) {
      best_epoch_g = epoch_g;
      stall = 0;
    } else {
      best_epoch_g = std::min(best_epoch_g, epoch_g);
      ++stall;
      if (stall >= state.config.converge_patience) {
        result.converged_early = true;
        break;
      }
    }
  }
  save_checkpoint(run_dir / "checkpoint.bin", state);
  result.history = state.history;
  return result;
}

std::vector<ScalarField2D> denoise(const TrainState& state, Denoiser which,
                                   const std::vector<ScalarField2D>& images) {
  std::vector<ScalarField2D> out;
  out.reserve(images.size());
  const auto& gen = which == Denoiser::GD ? state.model.g_d : state.model.g_da;
  for (const auto& img : images) {
    if (img.height != state.config.image_size || img.width != state.config.image_size)
      throw std::invalid_argument(
          "denoise: image resolution incompatible with checkpoint (expected " +
          std::to_string(state.config.image_size) + ")");
    Tensor<float> x(1, 1, img.height, img.width);
    data::normalize_into(img, x.plane_ptr(0, 0));
    auto y = gen.forward(x, nullptr);
    ScalarField2D res = data::denormalize(y.output.plane_ptr(0, 0), img.height, img.width);
    res.extent_w_nm = img.extent_w_nm;
    res.extent_h_nm = img.extent_h_nm;
    for (double& v : res.values) v = std::clamp(v, 0.0, 1.0);
    out.push_back(std::move(res));
  }
  return out;
}

// --- checkpointing ------------------------------------------------------------

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void put_blob(std::ostream& os, const std::string& name, const float* data,
              std::size_t n) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<std::uint32_t>(n));
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

struct Blob {
  std::string name;
  std::vector<float> data;
};

Blob get_blob(std::istream& is) {
  Blob b;
  const auto name_len = get_u32(is);
  b.name.resize(name_len);
  is.read(b.name.data(), name_len);
  const auto n = get_u32(is);
  b.data.resize(n);
  is.read(reinterpret_cast<char*>(b.data.data()), static_cast<std::streamsize>(n) * 4);
  if (!is) throw std::runtime_error("checkpoint: truncated blob");
  return b;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path.string());

  nlohmann::json meta;
  meta["version"] = 1;
  meta["channels_base"] = state.config.channels_base;
  meta["disc_channels"] = state.config.disc_channels;
  meta["image_size"] = state.config.image_size;
  meta["share_up"] = state.config.share_up;
  meta["seed"] = state.config.seed;
  meta["lr"] = state.config.lr;
  meta["beta1"] = state.config.beta1;
  meta["beta2"] = state.config.beta2;
  meta["adam_eps"] = state.config.adam_eps;
  meta["epochs"] = state.config.epochs;
  meta["batch"] = state.config.batch;
  meta["epoch"] = state.epoch;
  meta["global_step"] = state.global_step;
  meta["opt_d_steps"] = state.opt_d.step_count();
  meta["opt_g_steps"] = state.opt_g.step_count();
  meta["gen_mode"] = objectives::to_string(state.config.gen_mode);
  meta["weights"] = {{"lambda_d", state.config.weights.lambda_d},
                     {"lambda_b", state.config.weights.lambda_b},
                     {"lambda_cyc", state.config.weights.lambda_cyc},
                     {"lambda_da", state.config.weights.lambda_da},
                     {"lambda_fa", state.config.weights.lambda_fa}};
  // the shared-Up binding, recorded explicitly so loaders restore aliasing
  meta["shared_up_binding"] =
      state.config.share_up ? "G_D/up == G_DA/up (single parameter set G_shared)" : "none";
  const std::string meta_str = meta.dump();

  os.write("PDAC", 4);
  put_u32(os, 1);
  put_u32(os, static_cast<std::uint32_t>(meta_str.size()));
  os.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));

  // parameters (deduplicated: shared tensors serialize once under their name)
  const auto& opt_d = state.opt_d;
  const auto& opt_g = state.opt_g;
  const auto n_params = opt_d.params().size() + opt_g.params().size();
  put_u32(os, static_cast<std::uint32_t>(n_params * 3));
  for (auto* opt : {&opt_d, &opt_g}) {
    const auto& ps = opt->params();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      put_blob(os, ps[i]->name, ps[i]->value.data(), ps[i]->size());
      put_blob(os, "adam_m/" + ps[i]->name, opt->first_moments()[i].data(),
               opt->first_moments()[i].size());
      put_blob(os, "adam_v/" + ps[i]->name, opt->second_moments()[i].data(),
               opt->second_moments()[i].size());
    }
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed");
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "PDAC")
    throw std::runtime_error("load_checkpoint: bad magic");
  const auto version = get_u32(is);
  if (version != 1) throw std::runtime_error("load_checkpoint: unsupported version");
  const auto meta_len = get_u32(is);
  std::string meta_str(meta_len, '\0');
  is.read(meta_str.data(), meta_len);
  const auto meta = nlohmann::json::parse(meta_str);

  TrainConfig cfg;
  cfg.channels_base = meta.at("channels_base");
  cfg.disc_channels = meta.value("disc_channels", 0);
  cfg.image_size = meta.at("image_size");
  cfg.share_up = meta.at("share_up");
  cfg.seed = meta.at("seed");
  cfg.lr = meta.at("lr");
  cfg.beta1 = meta.at("beta1");
  cfg.beta2 = meta.at("beta2");
  cfg.adam_eps = meta.at("adam_eps");
  cfg.epochs = meta.at("epochs");
  cfg.batch = meta.at("batch");
  cfg.gen_mode = meta.at("gen_mode") == "saturating" ? GeneratorLossMode::Saturating
                                                     : GeneratorLossMode::NonSaturating;
  cfg.weights.lambda_d = meta.at("weights").at("lambda_d");
  cfg.weights.lambda_b = meta.at("weights").at("lambda_b");
  cfg.weights.lambda_cyc = meta.at("weights").at("lambda_cyc");
  cfg.weights.lambda_da = meta.at("weights").at("lambda_da");
  cfg.weights.lambda_fa = meta.at("weights").at("lambda_fa");

  TrainState state(cfg);
  state.epoch = meta.at("epoch");
  state.global_step = meta.at("global_step");
  state.opt_d.set_step_count(meta.at("opt_d_steps"));
  state.opt_g.set_step_count(meta.at("opt_g_steps"));

  std::unordered_map<std::string, float*> dest;
  std::unordered_map<std::string, std::size_t> sizes;
  for (auto* opt : {&state.opt_d, &state.opt_g}) {
    const auto& ps = opt->params();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      dest[ps[i]->name] = ps[i]->value.data();
      sizes[ps[i]->name] = ps[i]->size();
      dest["adam_m/" + ps[i]->name] = opt->first_moments()[i].data();
      sizes["adam_m/" + ps[i]->name] = opt->first_moments()[i].size();
      dest["adam_v/" + ps[i]->name] = opt->second_moments()[i].data();
      sizes["adam_v/" + ps[i]->name] = opt->second_moments()[i].size();
    }
  }

  const auto n_blobs = get_u32(is);
  std::size_t applied = 0;
  for (std::uint32_t i = 0; i < n_blobs; ++i) {
    Blob b = get_blob(is);
    auto it = dest.find(b.name);
    if (it == dest.end())
      throw std::runtime_error("load_checkpoint: unknown tensor " + b.name);
    if (sizes[b.name] != b.data.size())
      throw std::runtime_error("load_checkpoint: size mismatch for " + b.name);
    std::copy(b.data.begin(), b.data.end(), it->second);
    ++applied;
  }
  if (applied != dest.size())
    throw std::runtime_error("load_checkpoint: missing tensors");
  return state;
}

void append_history(const std::filesystem::path& path, long long step,
                    const LossReport& report) {
  std::ofstream os(path, std::ios::app);
  std::ostringstream line;
  line.precision(9);
  line << step;
  for (const auto& [name, value] : report.named()) line << '\t' << name << '=' << value;
  line << '\t' << "mode=" << report.generator_mode;
  os << line.str() << '\n';
}

} // namespace pdanet::train
