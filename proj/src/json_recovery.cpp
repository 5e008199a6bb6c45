#include "emosura/json_recovery.hpp"

#include <string>

namespace emosura {

namespace {

std::optional<nlohmann::json> parse_array(std::string_view text) {
  auto parsed = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;
  return parsed;
}

std::string strip_fences(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw.compare(i, 3, "```") == 0) {
      // Drop the fence and an optional language tag up to end of line.
      i += 3;
      while (i < raw.size() && raw[i] != '\n' && raw[i] != '[' && raw[i] != '{') ++i;
      continue;
    }
    out += raw[i++];
  }
  return out;
}

}  // namespace

namespace {

std::string_view balanced_from(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return {};
}

constexpr int kMaxRecoveryAttempts = 64;

}  // namespace

std::string_view first_balanced_array(std::string_view text) {
  for (auto start = text.find('['); start != std::string_view::npos;
       start = text.find('[', start + 1)) {
    if (auto span = balanced_from(text, start); !span.empty()) return span;
  }
  return {};
}

std::optional<nlohmann::json> extract_json_array(std::string_view raw) {
  if (auto direct = parse_array(raw)) return direct;
  const std::string stripped = strip_fences(raw);
  if (auto fenced = parse_array(stripped)) return fenced;
  // Prose may contain bracketed asides before the payload, so keep trying
  // later balanced spans for a bounded number of attempts.
  const std::string_view view(stripped);
  int attempts = 0;
  for (auto start = view.find('['); start != std::string_view::npos && attempts < kMaxRecoveryAttempts;
       start = view.find('[', start + 1)) {
    const auto span = balanced_from(view, start);
    if (span.empty()) continue;
    ++attempts;
    if (auto parsed = parse_array(span)) return parsed;
  }
  return std::nullopt;
}

}  // namespace emosura
