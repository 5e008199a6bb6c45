#include "emosura/bench/detection.hpp"

#include <cstdio>

namespace emosura::bench {

std::optional<double> DetectionRow::rate_pct() const {
  if (injected == 0) return std::nullopt;
  return 100.0 * static_cast<double>(detected) / static_cast<double>(injected);
}

std::string DetectionRow::rate_text() const {
  const auto rate = rate_pct();
  if (!rate) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *rate);
  return buf;
}

DetectionTable detection_rate(const std::vector<DetectionEvent>& events) {
  DetectionTable table;
  for (const auto& e : events) {
    auto& row = table[e.category];
    ++row.injected;
    if (e.detected) ++row.detected;
  }
  return table;
}

}  // namespace emosura::bench
