#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emosura/bench/features.hpp"

namespace emosura::bench {

struct AffectLabels {
  double valence = 4.0;
  double arousal = 4.0;
  std::optional<double> dominance;
};

struct GoldExample {
  AcousticFeatures features;
  AffectLabels labels;
  std::string caption;
};

class NoGoldExamples : public Error {
 public:
  using Error::Error;
};

/// Fixed-precision feature table; the pitch rows read "unvoiced" when the
/// clip has no voiced frames.
std::string render_feature_table(const AcousticFeatures& features, const AffectLabels& labels);

/// Few-shot drafting prompt: instructions, each gold example as table plus
/// caption, then the target table. Output is byte-deterministic.
std::string assemble_caption_prompt(const AcousticFeatures& features, const AffectLabels& labels,
                                    const std::vector<GoldExample>& gold);

}  // namespace emosura::bench
