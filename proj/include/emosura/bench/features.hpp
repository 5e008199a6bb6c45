#pragma once

// Paralinguistic descriptors used as objective evidence when drafting
// captions: pitch level and variation, loudness, jitter, shimmer, tempo.

#include <cstddef>
#include <span>
#include <vector>

#include "emosura/core.hpp"

namespace emosura::bench {

struct FeatureConfig {
  double frame_s = 0.025;
  double hop_s = 0.010;
  double min_f0_hz = 50.0;
  double max_f0_hz = 600.0;
  double voicing_threshold = 0.3;  // normalized autocorrelation peak
  double silence_dbfs = -60.0;
  int envelope_smoothing_frames = 5;
  double envelope_min_prominence = 0.05;  // fraction of the envelope mean
};

struct AcousticFeatures {
  bool voiced = false;  // false: pitch fields are 0 and render as "unvoiced"
  double pitch_median_hz = 0.0;
  double pitch_std_hz = 0.0;
  double loudness_dbfs = 0.0;
  double jitter_pct = 0.0;
  double shimmer_pct = 0.0;
  double tempo_peaks_per_s = 0.0;
  std::size_t voiced_frames = 0;
  std::size_t total_frames = 0;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class SilentAudio : public Error {
 public:
  using Error::Error;
};

class InvalidSampleRate : public Error {
 public:
  using Error::Error;
};

struct FramePitch {
  bool voiced = false;
  double f0_hz = 0.0;
  double strength = 0.0;  // normalized autocorrelation at the chosen lag
};

/// Autocorrelation pitch of one frame (mean removed), searching
/// [min_f0, max_f0] with parabolic refinement of the peak lag.
FramePitch estimate_frame_pitch(std::span<const float> frame, int sample_rate, const FeatureConfig& config = {});

/// Requires sample_rate >= 8000 and at least 0.5 s of audio.
AcousticFeatures extract_features(std::span<const float> pcm, int sample_rate, const FeatureConfig& config = {});

}  // namespace emosura::bench
