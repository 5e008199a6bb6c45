#include "emosura/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace emosura::log {

namespace {

std::atomic<Level> g_level{Level::Warn};
std::mutex g_mutex;

std::string_view name_of(Level level) {
  switch (level) {
    case Level::Error:
      return "error";
    case Level::Warn:
      return "warn";
    case Level::Info:
      return "info";
    case Level::Debug:
      return "debug";
  }
  return "info";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }

Level level() { return g_level.load(); }

Level parse_level(std::string_view name) {
  if (name == "error") return Level::Error;
  if (name == "warn") return Level::Warn;
  if (name == "info") return Level::Info;
  if (name == "debug") return Level::Debug;
  throw std::invalid_argument("unknown log level: " + std::string(name));
}

void emit(Level level, std::string_view message, const nlohmann::json& fields) {
  if (static_cast<int>(level) > static_cast<int>(g_level.load())) return;
  nlohmann::json record = fields.is_object() ? fields : nlohmann::json::object();
  record["level"] = name_of(level);
  record["msg"] = message;
  const std::string line = record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  const std::lock_guard lock(g_mutex);
  std::cerr << line << '\n';
}

}  // namespace emosura::log
