#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "ilash/energy.hpp"

namespace ilash {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key-value configuration: one `key = value` per line, '#' comments.
// Unknown keys and malformed lines raise ConfigError with line diagnostics.
class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config from_string(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<none>";
};

// Every key the run commands understand.
bool is_known_config_key(const std::string& key);

struct RunParams {
  double g_th = 0.2;
  int ll = 2;
  int ul = -1;  // trunk length - 2
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::string power_profile = "desk-cpu";
  double pue = kDefaultPue;
  int threads = 1;
  int trunk_layers = 12;
  bool train_shared_layers = false;
};

// Built-in defaults, overlaid by the config file, overlaid by CLI flags
// (passed as strings keyed by config-key name).
RunParams resolve_run_params(const Config& file_cfg,
                             const std::map<std::string, std::string>& cli_overrides);

}  // namespace ilash
