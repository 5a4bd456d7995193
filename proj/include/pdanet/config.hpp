#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

// Layered run configuration: built-in defaults, then an optional config file
// of `key = value` lines, then command-line --set overrides. Every consumer
// validates through typed getters that name the offending key. The effective
// configuration is echoed into every output directory.

namespace pdanet::config {

class RunConfig {
 public:
  static RunConfig defaults();

  // `--preset desk`: 64x64 rasters, 200 images per domain, 5 epochs,
  // channels_base 32, batch 8, fixed seed.
  void apply_preset(const std::string& name);
  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // sorted `key = value` lines; written as config.echo next to outputs
  std::string echo() const;
  void write_echo(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> values_;
};

} // namespace pdanet::config
