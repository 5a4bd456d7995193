#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pdanet/commands.hpp"
#include "pdanet/config.hpp"
#include "pdanet/data_pipeline.hpp"
#include "pdanet/hashing.hpp"
#include "pdanet/quality_metrics.hpp"

using namespace pdanet;
namespace fs = std::filesystem;

namespace {

config::RunConfig micro_config() {
  auto cfg = config::RunConfig::defaults();
  cfg.apply_preset("desk");
  cfg.set("data.train_count", "6");
  cfg.set("data.test_count", "3");
  cfg.set("data.batch", "2");
  cfg.set("train.epochs", "1");
  cfg.set("seed", "7");
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config: layering, presets, validation") {
  auto cfg = config::RunConfig::defaults();
  CHECK(cfg.get_double("physics.mu_eV") == 0.45);
  CHECK(cfg.get_double("train.lambda_fa") == 0.1);
  CHECK(cfg.get_bool("train.share_up"));

  cfg.apply_preset("desk");
  CHECK(cfg.get_int("data.resolution") == 64);
  CHECK(cfg.get_int("train.channels_base") == 32);
  CHECK(cfg.get_int("data.batch") == 8);
  CHECK(cfg.get_int("train.epochs") == 5);

  cfg.set("train.epochs", "3");
  CHECK(cfg.get_int("train.epochs") == 3);
  CHECK_THROWS_AS(cfg.set("no.such.key", "1"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply_preset("large"), std::invalid_argument);

  cfg.set("train.epochs", "not_a_number");
  CHECK_THROWS_AS(cfg.get_int("train.epochs"), std::invalid_argument);

  TempDir tmp("pdanet_cfg_test");
  {
    std::ofstream f(tmp.path / "run.conf");
    f << "# comment line\n";
    f << "physics.eta_eV = 0.004\n";
    f << "train.lambda_fa = 0.2  # inline comment\n";
  }
  auto cfg2 = config::RunConfig::defaults();
  cfg2.load_file(tmp.path / "run.conf");
  CHECK(cfg2.get_double("physics.eta_eV") == 0.004);
  CHECK(cfg2.get_double("train.lambda_fa") == 0.2);
}

TEST_CASE("simulate: deterministic directories, manifest contents") {
  auto cfg = micro_config();
  TempDir tmp("pdanet_cli_sim");
  cmd::run_simulate(cfg, tmp.path / "a", 4, "train", true);
  cmd::run_simulate(cfg, tmp.path / "b", 4, "train", true);
  CHECK(dir_hash(tmp.path / "a") == dir_hash(tmp.path / "b"));

  auto entries = data::read_manifest(tmp.path / "a" / "manifest.tsv");
  REQUIRE(entries.size() == 4);
  for (const auto& e : entries) {
    CHECK(e.domain == data::DomainTag::SimClear);
    CHECK(e.split == "train");
    CHECK(fs::exists(tmp.path / "a" / e.path));
  }
  CHECK(fs::exists(tmp.path / "a" / "config.echo"));
  CHECK(fs::exists(tmp.path / "a" / "provenance.txt"));

  // a different seed changes the pixels
  auto cfg2 = micro_config();
  cfg2.set("seed", "8");
  cmd::run_simulate(cfg2, tmp.path / "c", 4, "train", true);
  CHECK(dir_hash(tmp.path / "a") != dir_hash(tmp.path / "c"));

  // train and test streams are disjoint scenes
  cmd::run_simulate(cfg, tmp.path / "t", 4, "test", false);
  auto test_entries = data::read_manifest(tmp.path / "t" / "manifest.tsv");
  for (const auto& e : test_entries) CHECK(e.split == "test");
  CHECK(file_hash(tmp.path / "a" / entries[0].path) !=
        file_hash(tmp.path / "t" / test_entries[0].path));

  CHECK_THROWS_AS(cmd::run_simulate(cfg, tmp.path / "x", 0, "train", false),
                  std::invalid_argument);
  auto bad = micro_config();
  bad.set("physics.mu_eV", "-0.5");
  bad.set("physics.omega_eV", "0.2");
  CHECK_THROWS_AS(cmd::run_simulate(bad, tmp.path / "y", 2, "train", false),
                  std::domain_error);
}

TEST_CASE("degrade: domain tagging, determinism, different pseudo-exp knobs") {
  auto cfg = micro_config();
  TempDir tmp("pdanet_cli_deg");
  cmd::run_simulate(cfg, tmp.path / "clear", 3, "train", false);
  cmd::run_degrade(cfg, tmp.path / "clear", tmp.path / "blur", "SIM_BLUR");
  cmd::run_degrade(cfg, tmp.path / "clear", tmp.path / "blur2", "SIM_BLUR");
  cmd::run_degrade(cfg, tmp.path / "clear", tmp.path / "exp", "EXP");

  CHECK(dir_hash(tmp.path / "blur") == dir_hash(tmp.path / "blur2"));
  // the pseudo-experimental domain must differ from the simulated-blur domain
  CHECK(dir_hash(tmp.path / "blur") != dir_hash(tmp.path / "exp"));

  auto blur_entries = data::read_manifest(tmp.path / "blur" / "manifest.tsv");
  for (const auto& e : blur_entries) CHECK(e.domain == data::DomainTag::SimBlur);
  auto exp_entries = data::read_manifest(tmp.path / "exp" / "manifest.tsv");
  for (const auto& e : exp_entries) CHECK(e.domain == data::DomainTag::Exp);

  CHECK_THROWS_AS(cmd::run_degrade(cfg, tmp.path / "clear", tmp.path / "z", "SIM_CLEAR"),
                  std::invalid_argument);
  CHECK_THROWS_AS(cmd::run_degrade(cfg, tmp.path / "missing", tmp.path / "z", "SIM_BLUR"),
                  std::invalid_argument);
}

TEST_CASE("train + denoise + evaluate round trip at micro scale") {
  auto cfg = micro_config();
  cmd::configure_threads(cfg);
  TempDir tmp("pdanet_cli_train");
  cmd::run_simulate(cfg, tmp.path / "clear", 6, "train", false);
  cmd::run_simulate(cfg, tmp.path / "clear_test", 3, "test", false);
  cmd::run_degrade(cfg, tmp.path / "clear", tmp.path / "blur", "SIM_BLUR");
  cmd::run_degrade(cfg, tmp.path / "clear_test", tmp.path / "blur_test", "SIM_BLUR");
  cmd::run_degrade(cfg, tmp.path / "clear", tmp.path / "exp", "EXP");

  cmd::run_train(cfg, tmp.path / "clear", tmp.path / "blur", tmp.path / "exp",
                 tmp.path / "run");
  CHECK(fs::exists(tmp.path / "run" / "checkpoint.bin"));
  CHECK(fs::exists(tmp.path / "run" / "history.tsv"));

  cmd::run_denoise(cfg, tmp.path / "run" / "checkpoint.bin", tmp.path / "blur_test", "GD",
                   tmp.path / "den");
  auto den_entries = data::read_manifest(tmp.path / "den" / "manifest.tsv");
  CHECK(den_entries.size() == 3); // N outputs for N inputs

  cmd::run_evaluate(cfg, tmp.path / "den", tmp.path / "clear_test", tmp.path / "eval_ref");
  cmd::run_evaluate(cfg, tmp.path / "den", fs::path(), tmp.path / "eval_noref");
  {
    std::ifstream t(tmp.path / "eval_ref" / "report.tsv");
    std::string header;
    std::getline(t, header);
    CHECK(header == "id\tMSE\tPSNR\tSSIM");
  }
  {
    std::ifstream t(tmp.path / "eval_noref" / "report.tsv");
    std::string header;
    std::getline(t, header);
    CHECK(header == "id\tBRISQUE\tPIQE");
  }

  CHECK_THROWS_AS(cmd::run_denoise(cfg, tmp.path / "run" / "nope.bin", tmp.path / "blur",
                                   "GD", tmp.path / "z"),
                  std::invalid_argument);
  CHECK_THROWS_AS(cmd::run_denoise(cfg, tmp.path / "run" / "checkpoint.bin",
                                   tmp.path / "blur", "G", tmp.path / "z"),
                  std::invalid_argument);
}

TEST_CASE("brisque-model command writes a loadable file") {
  auto cfg = micro_config();
  TempDir tmp("pdanet_cli_bm");
  cmd::run_brisque_model(cfg, tmp.path / "ref.bin", false);
  auto model = metrics::load_brisque_model(tmp.path / "ref.bin");
  CHECK(model.svs.size() == 18);
  CHECK(model.rho == -85.0);
}
