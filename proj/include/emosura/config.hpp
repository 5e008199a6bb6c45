#pragma once

// Layered run configuration. Later layers win:
//   defaults < key=value file < EMOSURA_<KEY> environment < command line

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "emosura/core.hpp"

namespace emosura {

using ConfigLayer = std::map<std::string, std::string>;

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Every recognised key with its default value.
const ConfigLayer& config_defaults();

/// `key = value` lines; '#' starts a comment; values may be double-quoted.
/// Unknown keys are rejected.
ConfigLayer parse_config_text(std::string_view text);
ConfigLayer load_config_file(const std::filesystem::path& path);

/// EMOSURA_<UPPERCASE KEY> for every known key. The API key itself is never
/// read here; only the name of its variable is configurable.
ConfigLayer config_from_env();

class EffectiveConfig {
 public:
  static EffectiveConfig merge(const ConfigLayer& file, const ConfigLayer& env, const ConfigLayer& cli);

  const std::string& get(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  const std::string& source(const std::string& key) const;  // default|file|env|cli

  json to_json() const;
  /// sha256 over the canonical JSON of the merged values.
  std::string digest() const;

 private:
  ConfigLayer values_;
  ConfigLayer sources_;
};

/// Host part of a URL ("https://h:8000/v1" -> "h:8000"); empty for "".
std::string endpoint_host(std::string_view url);

}  // namespace emosura
