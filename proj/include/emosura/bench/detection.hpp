#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emosura::bench {

struct DetectionEvent {
  std::string category;  // perturbation type or finer label, e.g. "B" or "gender"
  bool detected = false;
};

struct DetectionRow {
  std::size_t injected = 0;
  std::size_t detected = 0;
  /// Percentage; empty when nothing was injected.
  std::optional<double> rate_pct() const;
  /// Two decimals, or "n/a" for an empty category.
  std::string rate_text() const;
};

using DetectionTable = std::map<std::string, DetectionRow>;

DetectionTable detection_rate(const std::vector<DetectionEvent>& events);

/// A sabotaged caption counts as detected only if it scores strictly lower.
inline bool is_detected(double perturbed_score, double reference_score) {
  return perturbed_score < reference_score;
}

}  // namespace emosura::bench
