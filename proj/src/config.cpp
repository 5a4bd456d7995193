#include "pdanet/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pdanet::config {

RunConfig RunConfig::defaults() {
  RunConfig c;
  auto& v = c.values_;
  // physics.*
  v["physics.m_eff"] = "0.38";
  v["physics.mu_eV"] = "0.45";
  v["physics.omega_eV"] = "0.01";
  v["physics.eta_eV"] = "0.002";
  v["physics.cutoff_nm"] = "0.25";
  v["physics.fov_nm"] = "20";
  v["physics.grid"] = "256";
  v["physics.impurity_min"] = "3";
  v["physics.impurity_max"] = "12";
  v["physics.strength_min"] = "1.0";
  v["physics.strength_max"] = "4.0";
  v["physics.margin_nm"] = "0.5";
  // degrade.* (simulated-blur domain)
  v["degrade.blur_sigma_px"] = "1.5";
  v["degrade.noise_sigma"] = "0.03";
  v["degrade.line_amp"] = "0.05";
  v["degrade.drift_shear_px"] = "2";
  // degrade.pseudo_exp.*: the deliberately different degradation that stands
  // in for the experimental domain when no real instrument images exist
  v["degrade.pseudo_exp.blur_sigma_px"] = "2.2";
  v["degrade.pseudo_exp.noise_sigma"] = "0.05";
  v["degrade.pseudo_exp.line_amp"] = "0.08";
  v["degrade.pseudo_exp.drift_shear_px"] = "3";
  // data.*
  v["data.resolution"] = "256";
  v["data.batch"] = "4";
  v["data.train_count"] = "3600";
  v["data.test_count"] = "200";
  v["data.augment.flips"] = "true";
  v["data.augment.rotations"] = "true";
  v["data.augment.crops_per_variant"] = "9";
  v["data.augment.crop_fraction"] = "0.85";
  // train.*
  v["train.lr"] = "2e-4";
  v["train.beta1"] = "0.5";
  v["train.beta2"] = "0.999";
  v["train.adam_eps"] = "1e-8";
  v["train.epochs"] = "40";
  v["train.channels_base"] = "64";
  v["train.disc_channels"] = "0"; // 0 = follow channels_base
  v["train.lambda_d"] = "1";
  v["train.lambda_b"] = "1";
  v["train.lambda_cyc"] = "1";
  v["train.lambda_da"] = "1";
  v["train.lambda_fa"] = "0.1";
  v["train.share_up"] = "true";
  v["train.gen_mode"] = "non_saturating";
  v["train.threads"] = "0"; // 0 = hardware concurrency, capped at 8
  v["train.checkpoint_every_epochs"] = "1";
  v["train.converge_rel"] = "0.01";
  v["train.converge_patience"] = "10";
  // metrics.*
  v["metrics.ssim.window"] = "11";
  v["metrics.ssim.sigma"] = "1.5";
  v["metrics.piqe.block_size"] = "16";
  v["metrics.piqe.activity_threshold"] = "0.1";
  v["metrics.piqe.segment_threshold"] = "0.1";
  v["metrics.piqe.segment_length"] = "6";
  v["metrics.piqe.noise_dispersion"] = "0.5";
  v["metrics.brisque.model"] = ""; // empty = the shipped reference model
  v["seed"] = "0";
  return c;
}

void RunConfig::apply_preset(const std::string& name) {
  if (name == "desk") {
    set("physics.grid", "64");
    set("data.resolution", "64");
    set("data.batch", "8");
    set("data.train_count", "200");
    set("data.test_count", "200");
    set("train.epochs", "5");
    set("train.channels_base", "32");
    set("seed", "77");
  } else if (name == "full") {
    // the defaults
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error("config: malformed line " + std::to_string(line_no) +
                                 " in " + path.string());
      continue;
    }
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const auto s = get_string(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: key '" + key + "' is not a number: '" + s + "'");
  }
}

int RunConfig::get_int(const std::string& key) const {
  const auto s = get_string(key);
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: key '" + key + "' is not an integer: '" + s + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const auto s = get_string(key);
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: key '" + key + "' is not an unsigned integer: '" +
                                s + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto s = get_string(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean: '" + s + "'");
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

void RunConfig::write_echo(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("config: cannot write " + path.string());
  os << echo();
}

} // namespace pdanet::config
