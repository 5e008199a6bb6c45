#pragma once

// Structured JSONL logging to stderr. stdout stays reserved for
// machine-readable summaries.

#include <string_view>

#include <json.hpp>

namespace emosura::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

void set_level(Level level);
Level level();
/// Accepts error|warn|info|debug; throws std::invalid_argument otherwise.
Level parse_level(std::string_view name);

void emit(Level level, std::string_view message, const nlohmann::json& fields = nlohmann::json::object());

inline void error(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::Error, m, f); }
inline void warn(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::Warn, m, f); }
inline void info(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::Info, m, f); }
inline void debug(std::string_view m, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::Debug, m, f); }

}  // namespace emosura::log
