#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pdanet/rng.hpp"
#include "pdanet/trainer.hpp"

using namespace pdanet;
namespace tr = pdanet::train;
using tr::TrainConfig;
using tr::TrainState;
using tr::PhaseProbe;
using tr::Denoiser;
using tr::train_step;
using tr::save_checkpoint;
using tr::load_checkpoint;
using tr::denoise;

namespace {

data::DomainDataset tiny_domain(data::DomainTag tag, int count, int size,
                                std::uint64_t seed) {
  std::vector<ScalarField2D> imgs;
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) {
    ScalarField2D img(size, size);
    Rng rng(derive_seed(seed, 50, i));
    for (double& v : img.values) v = rng.uniform();
    imgs.push_back(std::move(img));
    ids.push_back(data::to_string(tag) + "_" + std::to_string(i));
  }
  return data::DomainDataset(tag, std::move(imgs), std::move(ids));
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.image_size = 32;
  cfg.channels_base = 8;
  cfg.batch = 2;
  cfg.epochs = 2;
  cfg.seed = 9;
  cfg.checkpoint_every_epochs = 0;
  return cfg;
}

std::vector<float> snapshot(const std::vector<nn::ParamPtr<float>>& ps) {
  std::vector<float> out;
  for (const auto& p : ps) out.insert(out.end(), p->value.begin(), p->value.end());
  return out;
}

} // namespace

TEST_CASE("train_step: determinism, freeze discipline, sharing invariant") {
  auto blur = tiny_domain(data::DomainTag::SimBlur, 4, 32, 1);
  auto clear = tiny_domain(data::DomainTag::SimClear, 4, 32, 2);
  auto exp = tiny_domain(data::DomainTag::Exp, 4, 32, 3);
  data::UnpairedLoader lb(blur, 2, 9), lc(clear, 2, 9), le(exp, 2, 9);
  data::ImageBatch bb, bc, be;
  lb.next(bb);
  lc.next(bc);
  le.next(be);

  // identical states take identical steps
  TrainState s1(tiny_config()), s2(tiny_config());
  auto r1 = train_step(s1, bb, bc, be);
  auto r2 = train_step(s2, bb, bc, be);
  CHECK(r1.total_d == r2.total_d);
  CHECK(r1.total_g == r2.total_g);
  CHECK(r1.cyc_f == r2.cyc_f);
  CHECK(snapshot(s1.model.all_params()) == snapshot(s2.model.all_params()));

  // freeze discipline: in each phase the frozen side moves by exactly zero
  TrainState s3(tiny_config());
  std::vector<float> gen_before = snapshot(s3.model.generator_params());
  std::vector<float> disc_after_p1;
  PhaseProbe probe;
  probe.after_discriminator_phase = [&](const TrainState& st) {
    CHECK(snapshot(st.model.generator_params()) == gen_before);
    disc_after_p1 = snapshot(st.model.discriminator_params());
  };
  probe.after_generator_phase = [&](const TrainState& st) {
    CHECK(snapshot(st.model.discriminator_params()) == disc_after_p1);
    // weight sharing: the two up stages are bitwise identical parameters
    auto up_d = st.model.g_d.up_params();
    auto up_da = st.model.g_da.up_params();
    REQUIRE(up_d.size() == up_da.size());
    for (std::size_t i = 0; i < up_d.size(); ++i) {
      CHECK(up_d[i].get() == up_da[i].get());
      CHECK(up_d[i]->value == up_da[i]->value);
    }
  };
  auto r3 = train_step(s3, bb, bc, be, &probe);
  CHECK(r3.finite);
  // generators did change in phase 2
  CHECK(snapshot(s3.model.generator_params()) != gen_before);

  // without sharing, the two up stages drift apart after one step
  TrainConfig noshare = tiny_config();
  noshare.share_up = false;
  TrainState s4(noshare);
  train_step(s4, bb, bc, be);
  CHECK(snapshot(s4.model.g_d.up_params()) != snapshot(s4.model.g_da.up_params()));
}

TEST_CASE("train_step: non-finite loss aborts the step and flags the report") {
  TrainState s(tiny_config());
  auto blur = tiny_domain(data::DomainTag::SimBlur, 2, 32, 1);
  data::UnpairedLoader lb(blur, 2, 9);
  data::ImageBatch bb;
  lb.next(bb);
  // poison one discriminator weight; its scores go non-finite
  s.model.d_d.params()[0]->value[0] = std::nanf("");
  const long long step_before = s.global_step;
  auto rep = train_step(s, bb, bb, bb);
  CHECK_FALSE(rep.finite);
  CHECK(s.global_step == step_before);
}

TEST_CASE("train: epochs=0 returns initialized networks and empty history") {
  namespace fs = std::filesystem;
  auto cfg = tiny_config();
  cfg.epochs = 0;
  TrainState s(cfg);
  auto dir = fs::temp_directory_path() / "pdanet_train_e0";
  fs::create_directories(dir);
  auto blur = tiny_domain(data::DomainTag::SimBlur, 4, 32, 1);
  auto clear = tiny_domain(data::DomainTag::SimClear, 4, 32, 2);
  auto exp = tiny_domain(data::DomainTag::Exp, 4, 32, 3);
  auto result = tr::train(s, blur, clear, exp, dir);
  CHECK(result.epochs_run == 0);
  CHECK(result.history.empty());
  CHECK(fs::exists(dir / "checkpoint.bin")); // initial state is still persisted
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: round trip restores parameters, moments, and aliasing") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "pdanet_ckpt_test";
  fs::create_directories(dir);

  auto blur = tiny_domain(data::DomainTag::SimBlur, 4, 32, 1);
  auto clear = tiny_domain(data::DomainTag::SimClear, 4, 32, 2);
  auto exp = tiny_domain(data::DomainTag::Exp, 4, 32, 3);

  TrainState s(tiny_config());
  data::UnpairedLoader lb(blur, 2, 9), lc(clear, 2, 9), le(exp, 2, 9);
  data::ImageBatch bb, bc, be;
  lb.next(bb);
  lc.next(bc);
  le.next(be);
  train_step(s, bb, bc, be);
  save_checkpoint(dir / "ck.bin", s);

  TrainState loaded = load_checkpoint(dir / "ck.bin");
  CHECK(snapshot(loaded.model.all_params()) == snapshot(s.model.all_params()));
  CHECK(loaded.global_step == s.global_step);
  // aliasing, not copies
  auto up_d = loaded.model.g_d.up_params();
  auto up_da = loaded.model.g_da.up_params();
  for (std::size_t i = 0; i < up_d.size(); ++i) CHECK(up_d[i].get() == up_da[i].get());

  // next step from the loaded state matches the original exactly
  auto r_orig = train_step(s, bb, bc, be);
  auto r_load = train_step(loaded, bb, bc, be);
  CHECK(r_orig.total_g == r_load.total_g);
  CHECK(r_orig.total_d == r_load.total_d);
  fs::remove_all(dir);
}

TEST_CASE("train: resume from mid-run checkpoint reproduces the full run") {
  namespace fs = std::filesystem;
  auto dir_a = fs::temp_directory_path() / "pdanet_resume_a";
  auto dir_b = fs::temp_directory_path() / "pdanet_resume_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  auto blur = tiny_domain(data::DomainTag::SimBlur, 4, 32, 1);
  auto clear = tiny_domain(data::DomainTag::SimClear, 4, 32, 2);
  auto exp = tiny_domain(data::DomainTag::Exp, 4, 32, 3);

  // uninterrupted: 4 epochs
  auto cfg = tiny_config();
  cfg.epochs = 4;
  TrainState full(cfg);
  auto res_full = tr::train(full, blur, clear, exp, dir_a);

  // interrupted: 2 epochs, checkpoint, reload, continue to 4
  auto cfg_half = tiny_config();
  cfg_half.epochs = 2;
  TrainState half(cfg_half);
  tr::train(half, blur, clear, exp, dir_b);
  TrainState resumed = load_checkpoint(dir_b / "checkpoint.bin");
  resumed.config.epochs = 4;
  auto res_resumed = tr::train(resumed, blur, clear, exp, dir_b / "cont");

  // the resumed run's later losses equal the uninterrupted run's bitwise
  REQUIRE(res_full.history.size() == 8); // 2 steps/epoch * 4 epochs
  REQUIRE(res_resumed.history.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(res_full.history[4 + i].total_g == res_resumed.history[i].total_g);
    CHECK(res_full.history[4 + i].total_d == res_resumed.history[i].total_d);
  }
  CHECK(snapshot(full.model.all_params()) == snapshot(resumed.model.all_params()));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("denoise: shape, determinism, resolution validation") {
  TrainState s(tiny_config());
  std::vector<ScalarField2D> imgs;
  ScalarField2D img(32, 32);
  Rng rng(5);
  for (double& v : img.values) v = rng.uniform();
  imgs.push_back(img);

  auto out1 = denoise(s, Denoiser::GD, imgs);
  auto out2 = denoise(s, Denoiser::GD, imgs);
  REQUIRE(out1.size() == 1);
  CHECK(out1[0].height == 32);
  CHECK(out1[0].width == 32);
  CHECK(out1[0].values == out2[0].values);
  auto [lo, hi] = out1[0].min_max();
  CHECK(lo >= 0.0);
  CHECK(hi <= 1.0);

  std::vector<ScalarField2D> wrong{ScalarField2D(16, 16)};
  CHECK_THROWS_AS(denoise(s, Denoiser::GDA, wrong), std::invalid_argument);
}
