#include "emosura/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "emosura/backend.hpp"
#include "emosura/hashing.hpp"
#include "emosura/text.hpp"

namespace emosura {

namespace {

ConfigLayer make_defaults() {
  return {
      {"text_endpoint", ""},
      {"audio_endpoint", ""},
      {"api_key_env", "EMOSURA_API_KEY"},
      {"text_model", std::string(kDefaultTextModel)},
      {"audio_model", std::string(kDefaultAudioModel)},
      {"timeout_s", "60"},
      {"max_inflight", "8"},
      {"retry_attempts", "3"},
      {"max_attachment_bytes", std::to_string(kDefaultMaxAttachmentBytes)},
      {"cache_dir", ""},
      {"mock", ""},
      {"audio_root", "."},
      {"descriptive_attrs", "pitch,rate,volume,emotion"},
      {"extended_attributes", "false"},
      {"gt_context", "true"},
      {"jobs", "0"},  // 0: one per logical core
      {"log_level", "warn"},
      {"lexicon_dir", "data/lexicon"},
  };
}

std::string env_name(const std::string& key) {
  std::string out = "EMOSURA_";
  for (const char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

const ConfigLayer& config_defaults() {
  static const ConfigLayer defaults = make_defaults();
  return defaults;
}

ConfigLayer parse_config_text(std::string_view text) {
  ConfigLayer layer;
  std::size_t lineno = 0;
  for (const auto& raw : text::split(text, '\n')) {
    ++lineno;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    std::string_view value = text::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (const auto hash = value.find(" #"); hash != std::string_view::npos) {
      value = text::trim(value.substr(0, hash));
    }
    if (!config_defaults().contains(key)) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key " + key);
    layer[key] = std::string(value);
  }
  return layer;
}

ConfigLayer load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ConfigLayer config_from_env() {
  ConfigLayer layer;
  for (const auto& [key, unused] : config_defaults()) {
    if (const char* v = std::getenv(env_name(key).c_str()); v != nullptr) layer[key] = v;
  }
  return layer;
}

EffectiveConfig EffectiveConfig::merge(const ConfigLayer& file, const ConfigLayer& env, const ConfigLayer& cli) {
  EffectiveConfig cfg;
  for (const auto& [k, v] : config_defaults()) {
    cfg.values_[k] = v;
    cfg.sources_[k] = "default";
  }
  const auto apply = [&](const ConfigLayer& layer, const char* name) {
    for (const auto& [k, v] : layer) {
      if (!config_defaults().contains(k)) throw ConfigError("unknown configuration key " + k);
      cfg.values_[k] = v;
      cfg.sources_[k] = name;
    }
  };
  apply(file, "file");
  apply(env, "env");
  apply(cli, "cli");
  return cfg;
}

const std::string& EffectiveConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key " + key);
  return it->second;
}

bool EffectiveConfig::get_bool(const std::string& key) const {
  const auto v = text::to_lower(get(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
  throw ConfigError(key + ": expected a boolean, got " + get(key));
}

double EffectiveConfig::get_double(const std::string& key) const {
  try {
    std::size_t used = 0;
    const double v = std::stod(get(key), &used);
    if (used == get(key).size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got " + get(key));
}

std::size_t EffectiveConfig::get_size(const std::string& key) const {
  const auto& raw = get(key);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used);
    if (used == raw.size() && raw.front() != '-') return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a non-negative integer, got " + raw);
}

const std::string& EffectiveConfig::source(const std::string& key) const {
  const auto it = sources_.find(key);
  if (it == sources_.end()) throw ConfigError("unknown configuration key " + key);
  return it->second;
}

json EffectiveConfig::to_json() const { return json(values_); }

std::string EffectiveConfig::digest() const { return sha256_hex(to_json().dump()); }

std::string endpoint_host(std::string_view url) {
  if (url.empty()) return {};
  if (const auto scheme = url.find("://"); scheme != std::string_view::npos) url.remove_prefix(scheme + 3);
  if (const auto at = url.find('@'); at != std::string_view::npos && at < url.find('/')) url.remove_prefix(at + 1);
  return std::string(url.substr(0, url.find('/')));
}

}  // namespace emosura
