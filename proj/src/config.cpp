#include "ilash/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ilash {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const char* kKnownKeys[] = {"g_th",       "ll",         "ul",
                            "epochs",     "batch_size", "learning_rate",
                            "seed",       "power_profile", "pue",
                            "threads",    "trunk_layers", "train_shared_layers"};

}  // namespace

bool is_known_config_key(const std::string& key) {
  return std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) !=
         std::end(kKnownKeys);
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path.string());
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    }
    if (!is_known_config_key(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key +
                        "'");
    }
    if (cfg.values_.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                        "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0') {
    throw ConfigError(origin_ + ": key '" + key + "' is not a number: " + it->second);
  }
  return v;
}

int Config::get_int(const std::string& key, int def) const {
  const double v = get_double(key, static_cast<double>(def));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError(origin_ + ": key '" + key + "' must be an integer");
  }
  return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0') {
    throw ConfigError(origin_ + ": key '" + key + "' is not an unsigned integer: " +
                      it->second);
  }
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: " + v);
}

RunParams resolve_run_params(const Config& file_cfg,
                             const std::map<std::string, std::string>& cli_overrides) {
  for (const auto& [key, value] : cli_overrides) {
    if (!is_known_config_key(key)) {
      throw ConfigError("unknown option key '" + key + "'");
    }
  }
  std::string merged;
  for (const auto& [key, value] : cli_overrides) {
    merged += key + " = " + value + "\n";
  }
  const Config cli = Config::from_string(merged, "<cli>");
  auto pick_double = [&](const std::string& key, double def) {
    return cli.has(key) ? cli.get_double(key, def) : file_cfg.get_double(key, def);
  };
  auto pick_int = [&](const std::string& key, int def) {
    return cli.has(key) ? cli.get_int(key, def) : file_cfg.get_int(key, def);
  };

  RunParams p;
  p.g_th = pick_double("g_th", p.g_th);
  p.ll = pick_int("ll", p.ll);
  p.ul = pick_int("ul", p.ul);
  p.epochs = pick_int("epochs", p.epochs);
  p.batch_size = pick_int("batch_size", p.batch_size);
  p.learning_rate = pick_double("learning_rate", p.learning_rate);
  p.seed = cli.has("seed") ? cli.get_u64("seed", p.seed) : file_cfg.get_u64("seed", p.seed);
  p.power_profile = cli.has("power_profile")
                        ? cli.get_string("power_profile", p.power_profile)
                        : file_cfg.get_string("power_profile", p.power_profile);
  p.pue = pick_double("pue", p.pue);
  p.threads = pick_int("threads", p.threads);
  p.trunk_layers = pick_int("trunk_layers", p.trunk_layers);
  p.train_shared_layers = cli.has("train_shared_layers")
                              ? cli.get_bool("train_shared_layers", p.train_shared_layers)
                              : file_cfg.get_bool("train_shared_layers", p.train_shared_layers);

  if (p.g_th < 0.0 || p.g_th > 1.0) throw ConfigError("g_th must lie in [0, 1]");
  if (p.ll < 0) throw ConfigError("ll must be >= 0");
  if (p.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (p.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (p.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (p.pue <= 0.0) throw ConfigError("pue must be positive");
  if (p.threads < 1) throw ConfigError("threads must be >= 1");
  if (p.trunk_layers < 1) throw ConfigError("trunk_layers must be >= 1");
  return p;
}

}  // namespace ilash
