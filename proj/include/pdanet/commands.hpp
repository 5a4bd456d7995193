#pragma once

#include <filesystem>
#include <string>

#include "pdanet/config.hpp"

// The workflow commands behind the CLI: simulate -> degrade -> train ->
// denoise -> evaluate, plus the four-variant ablation driver and the BRISQUE
// model writer. Every command writes an effective-config echo and a
// timestamp-free provenance record into its output directory, so identical
// inputs and seeds reproduce outputs bitwise. Validation problems throw
// std::invalid_argument (CLI exit 2); runtime failures throw
// std::runtime_error (CLI exit 1).

namespace pdanet::cmd {

void run_simulate(const config::RunConfig& cfg, const std::filesystem::path& out_dir,
                  int count, const std::string& split, bool preview);

// domain: "SIM_BLUR" uses degrade.*; "EXP" uses degrade.pseudo_exp.*.
void run_degrade(const config::RunConfig& cfg, const std::filesystem::path& in_dir,
                 const std::filesystem::path& out_dir, const std::string& domain);

void run_train(const config::RunConfig& cfg, const std::filesystem::path& clear_dir,
               const std::filesystem::path& blur_dir, const std::filesystem::path& exp_dir,
               const std::filesystem::path& out_dir);

// which: "GD" or "GDA"
void run_denoise(const config::RunConfig& cfg, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& in_dir, const std::string& which,
                 const std::filesystem::path& out_dir, bool preview = false);

// ref_dir empty -> no-reference report (BRISQUE/PIQE); otherwise MSE/PSNR/SSIM.
void run_evaluate(const config::RunConfig& cfg, const std::filesystem::path& in_dir,
                  const std::filesystem::path& ref_dir,
                  const std::filesystem::path& out_dir);

// Runs the full pipeline once per variant row: plain cycle-consistency,
// + domain adversarial, + weight sharing, and the complete model with
// feature alignment. Emits workdir/ablation.tsv with one row per variant.
void run_ablate(const config::RunConfig& cfg, const std::filesystem::path& workdir);

void run_brisque_model(const config::RunConfig& cfg, const std::filesystem::path& out_file,
                       bool calibrate);

void configure_threads(const config::RunConfig& cfg);

inline constexpr const char* kVersion = "pdanet 0.1.0";

} // namespace pdanet::cmd
