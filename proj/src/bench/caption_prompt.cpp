#include "emosura/bench/caption_prompt.hpp"

#include <cstdio>

namespace emosura::bench {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

constexpr std::string_view kInstructions =
    "You write detailed descriptions of emotional speech. Each description covers the speaker's "
    "gender, pitch and pitch variation, loudness, voice quality, speaking tempo, and the emotion "
    "conveyed, grounded in the measured features and affect ratings provided. Write one fluent "
    "paragraph. Do not mention numeric values.\n";

}  // namespace

std::string render_feature_table(const AcousticFeatures& f, const AffectLabels& labels) {
  std::string out;
  out += "| feature | value |\n";
  out += "|---|---|\n";
  if (f.voiced) {
    out += "| pitch median (Hz) | " + fixed(f.pitch_median_hz, 1) + " |\n";
    out += "| pitch variation (Hz) | " + fixed(f.pitch_std_hz, 1) + " |\n";
  } else {
    out += "| pitch median (Hz) | unvoiced |\n";
    out += "| pitch variation (Hz) | unvoiced |\n";
  }
  out += "| loudness (dBFS) | " + fixed(f.loudness_dbfs, 1) + " |\n";
  out += "| jitter (%) | " + fixed(f.jitter_pct, 2) + " |\n";
  out += "| shimmer (%) | " + fixed(f.shimmer_pct, 2) + " |\n";
  out += "| tempo (peaks/s) | " + fixed(f.tempo_peaks_per_s, 2) + " |\n";
  out += "| valence (1-7) | " + fixed(labels.valence, 2) + " |\n";
  out += "| arousal (1-7) | " + fixed(labels.arousal, 2) + " |\n";
  if (labels.dominance) out += "| dominance (1-7) | " + fixed(*labels.dominance, 2) + " |\n";
  return out;
}

std::string assemble_caption_prompt(const AcousticFeatures& features, const AffectLabels& labels,
                                    const std::vector<GoldExample>& gold) {
  if (gold.empty()) throw NoGoldExamples("caption prompt needs at least one gold example");
  std::string out(kInstructions);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    out += "\n### Example " + std::to_string(i + 1) + "\n";
    out += render_feature_table(gold[i].features, gold[i].labels);
    out += "Description: " + gold[i].caption + "\n";
  }
  out += "\n### Target\n";
  out += render_feature_table(features, labels);
  out += "Description:";
  return out;
}

}  // namespace emosura::bench
