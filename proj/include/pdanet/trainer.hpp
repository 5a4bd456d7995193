#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdanet/data_pipeline.hpp"
#include "pdanet/field2d.hpp"
#include "pdanet/nn/adam.hpp"
#include "pdanet/nn/networks.hpp"
#include "pdanet/objectives.hpp"

// The alternating two-phase schedule: per batch triple, generate the three
// synthetic batches, ascend the weighted discriminator aggregate with all
// generator parameters frozen, then descend the weighted generator aggregate
// (adversarial + cycle + feature alignment) with all discriminator
// parameters frozen. Exactly one optimizer step per phase.

namespace pdanet::train {

using objectives::GeneratorLossMode;
using objectives::LossReport;
using objectives::LossWeights;

struct TrainConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 5;
  int batch = 4;
  int image_size = 256;
  int channels_base = 64;
  int disc_channels = 0; // 0 = follow channels_base
  LossWeights weights;
  bool share_up = true;
  GeneratorLossMode gen_mode = GeneratorLossMode::NonSaturating;
  std::uint64_t seed = 0;
  int checkpoint_every_epochs = 1;
  // stop when the epoch-mean total_G improves by less than converge_rel for
  // converge_patience consecutive epochs
  double converge_rel = 0.01;
  int converge_patience = 10;

  void validate() const;
};

// The seven networks. Generators expose their feature stage phi and Up stage
// separately; with share_up the two denoisers hold the same Up parameter set.
struct ModelBundle {
  nn::GeneratorNet<float> g_d;   // simulated-blur denoiser
  nn::GeneratorNet<float> g_b;   // blur generator (cycle partner)
  nn::GeneratorNet<float> g_da;  // experimental-domain denoiser
  nn::DiscriminatorNet<float> d_d, d_b, d_da;
  nn::DiscriminatorNet<float> d_fa;
  bool shared_up = true;

  std::vector<nn::ParamPtr<float>> generator_params() const;
  std::vector<nn::ParamPtr<float>> discriminator_params() const;
  std::vector<nn::ParamPtr<float>> all_params() const;
};

ModelBundle build_model(int channels_base, int disc_channels, bool share_up,
                        std::uint64_t seed);

struct TrainState {
  ModelBundle model;
  nn::Adam<float> opt_d;
  nn::Adam<float> opt_g;
  TrainConfig config;
  int epoch = 0;
  long long global_step = 0;
  std::vector<LossReport> history;

  explicit TrainState(const TrainConfig& cfg);
};

// Instrumentation points between the two optimizer phases; freeze-discipline
// checks snapshot parameters here.
struct PhaseProbe {
  std::function<void(const TrainState&)> after_discriminator_phase;
  std::function<void(const TrainState&)> after_generator_phase;
};

// One alternating step on a triple of same-sized batches
// {simulated blurry, simulated clear, experimental}. A non-finite loss
// aborts the step and returns a report with finite == false.
LossReport train_step(TrainState& state, const data::ImageBatch& blur,
                      const data::ImageBatch& clear, const data::ImageBatch& exp,
                      const PhaseProbe* probe = nullptr);

struct TrainCallbacks {
  // invoked after every full step with the fresh report
  std::function<void(const TrainState&, const LossReport&)> on_step;
  // invoked at end of each epoch with the epoch-mean total_G
  std::function<void(const TrainState&, double)> on_epoch;
};

struct TrainResult {
  int epochs_run = 0;
  bool converged_early = false;
  std::vector<LossReport> history;
};

TrainResult train(TrainState& state, const data::DomainDataset& blur,
                  const data::DomainDataset& clear, const data::DomainDataset& exp,
                  const std::filesystem::path& run_dir, const TrainCallbacks& cb = {});

enum class Denoiser { GD, GDA };

// Batch inference: [0,1] images in, [0,1] images out. Deterministic.
std::vector<ScalarField2D> denoise(const TrainState& state, Denoiser which,
                                   const std::vector<ScalarField2D>& images);

// --- checkpointing -----------------------------------------------------------

// Binary container of named float tensors plus a JSON metadata blob that
// records the architecture, counters, and the shared-Up binding, so a load
// reconstructs aliasing rather than copies.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

// history serialization: one line per step, step index + named losses (the
// deterministic artifact); wall-clock timing goes to the runlog instead
void append_history(const std::filesystem::path& path, long long step,
                    const LossReport& report);

} // namespace pdanet::train
