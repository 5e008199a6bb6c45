#include "emosura/bench/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace emosura::bench {

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// Mean absolute successive difference over the mean, in percent.
double perturbation_pct(std::span<const double> values, std::span<const std::size_t> run_breaks) {
  double diff_sum = 0.0;
  std::size_t diffs = 0;
  std::size_t next_break = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    while (next_break < run_breaks.size() && run_breaks[next_break] < i) ++next_break;
    if (next_break < run_breaks.size() && run_breaks[next_break] == i) continue;  // new run starts at i
    diff_sum += std::abs(values[i] - values[i - 1]);
    ++diffs;
  }
  const double m = mean_of(values);
  if (diffs == 0 || m <= 0.0) return 0.0;
  return 100.0 * (diff_sum / static_cast<double>(diffs)) / m;
}

struct CycleTrack {
  std::vector<double> periods;     // seconds
  std::vector<double> amplitudes;  // peak |x| per cycle
  std::vector<std::size_t> breaks; // index where a new voiced run begins
};

/// Cycle-level periods and peak amplitudes inside one voiced run, using
/// rising zero crossings spaced at least 0.7 of the frame-level period.
void track_cycles(std::span<const float> x, int sample_rate, std::span<const double> frame_f0,
                  std::size_t hop, CycleTrack& track) {
  if (x.size() < 3) return;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const auto at = [&](std::size_t i) { return static_cast<double>(x[i]) - mean; };
  const auto local_period = [&](double pos) {
    const auto f = std::min<std::size_t>(static_cast<std::size_t>(pos) / std::max<std::size_t>(hop, 1),
                                         frame_f0.size() - 1);
    return static_cast<double>(sample_rate) / frame_f0[f];
  };

  std::vector<double> crossings;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = at(i - 1);
    const double b = at(i);
    if (a < 0.0 && b >= 0.0) {
      const double pos = static_cast<double>(i - 1) + a / (a - b);
      if (crossings.empty() || pos - crossings.back() >= 0.7 * local_period(pos)) crossings.push_back(pos);
    }
  }

  bool first_in_run = true;
  for (std::size_t c = 1; c < crossings.size(); ++c) {
    const double start = crossings[c - 1];
    const double end = crossings[c];
    const double period = end - start;
    const double expected = local_period(start);
    if (period < 0.5 * expected || period > 1.5 * expected) {
      first_in_run = true;
      continue;
    }
    const auto lo = static_cast<std::size_t>(std::ceil(start));
    const auto hi = std::min(static_cast<std::size_t>(std::floor(end)), x.size() - 1);
    std::size_t peak = lo;
    for (std::size_t i = lo; i <= hi; ++i) {
      if (std::abs(at(i)) > std::abs(at(peak))) peak = i;
    }
    double amplitude = std::abs(at(peak));
    if (peak > 0 && peak + 1 < x.size()) {
      const double y0 = std::abs(at(peak - 1));
      const double y1 = amplitude;
      const double y2 = std::abs(at(peak + 1));
      const double denom = y0 - 2.0 * y1 + y2;
      if (denom < 0.0) {
        const double p = 0.5 * (y0 - y2) / denom;
        amplitude = y1 - 0.25 * (y0 - y2) * p;
      }
    }
    if (first_in_run) {
      track.breaks.push_back(track.periods.size());
      first_in_run = false;
    }
    track.periods.push_back(period / sample_rate);
    track.amplitudes.push_back(amplitude);
  }
}

}  // namespace

FramePitch estimate_frame_pitch(std::span<const float> frame, int sample_rate, const FeatureConfig& config) {
  FramePitch result;
  const std::size_t n = frame.size();
  if (n < 4) return result;
  const double mean = std::accumulate(frame.begin(), frame.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = frame[i] - mean;

  const auto min_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(sample_rate / config.max_f0_hz)));
  const auto max_lag = std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::ceil(sample_rate / config.min_f0_hz)));
  if (min_lag + 2 > max_lag) return result;

  // Normalized over the overlapping segments so long lags are not penalized.
  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t lag = min_lag - 1; lag <= max_lag + 1 && lag < n; ++lag) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      xy += x[i] * x[i + lag];
      xx += x[i] * x[i];
      yy += x[i + lag] * x[i + lag];
    }
    r[lag] = (xx > 0.0 && yy > 0.0) ? xy / std::sqrt(xx * yy) : 0.0;
  }

  double best = 0.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) best = std::max(best, r[lag]);
  if (best < config.voicing_threshold) {
    result.strength = best;
    return result;
  }
  // Earliest local peak close to the global maximum avoids octave-down picks.
  std::size_t chosen = 0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    if (r[lag] >= 0.9 * best && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
      chosen = lag;
      break;
    }
  }
  if (chosen == 0) return result;

  double refined = static_cast<double>(chosen);
  const double y0 = r[chosen - 1], y1 = r[chosen], y2 = r[chosen + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom < 0.0) refined += 0.5 * (y0 - y2) / denom;

  result.voiced = true;
  result.strength = y1;
  result.f0_hz = sample_rate / refined;
  return result;
}

AcousticFeatures extract_features(std::span<const float> pcm, int sample_rate, const FeatureConfig& config) {
  if (sample_rate < 8000) throw InvalidSampleRate("sample rate must be at least 8 kHz");
  if (static_cast<double>(pcm.size()) < 0.5 * sample_rate) throw TooShort("audio shorter than 0.5 s");

  const auto frame_len = static_cast<std::size_t>(std::lround(config.frame_s * sample_rate));
  const auto hop = static_cast<std::size_t>(std::lround(config.hop_s * sample_rate));

  AcousticFeatures features;
  double energy = 0.0;
  for (const float s : pcm) energy += static_cast<double>(s) * s;
  const double rms = std::sqrt(energy / static_cast<double>(pcm.size()));
  features.loudness_dbfs = rms > 0.0 ? 20.0 * std::log10(rms) : -std::numeric_limits<double>::infinity();

  std::vector<FramePitch> frames;
  std::vector<double> envelope;
  for (std::size_t start = 0; start + frame_len <= pcm.size(); start += hop) {
    const auto frame = pcm.subspan(start, frame_len);
    double e = 0.0;
    for (const float s : frame) e += static_cast<double>(s) * s;
    envelope.push_back(std::sqrt(e / static_cast<double>(frame_len)));
    frames.push_back(estimate_frame_pitch(frame, sample_rate, config));
  }
  features.total_frames = frames.size();

  std::vector<double> voiced_f0;
  for (const auto& f : frames) {
    if (f.voiced) voiced_f0.push_back(f.f0_hz);
  }
  features.voiced_frames = voiced_f0.size();
  if (voiced_f0.empty() && features.loudness_dbfs < config.silence_dbfs) {
    throw SilentAudio("no voiced frames and RMS below " + std::to_string(config.silence_dbfs) + " dBFS");
  }

  if (!voiced_f0.empty()) {
    features.voiced = true;
    features.pitch_median_hz = median_of(voiced_f0);
    features.pitch_std_hz = population_std(voiced_f0);

    // Cycle tracking over each run of consecutive voiced frames.
    CycleTrack track;
    std::size_t f = 0;
    while (f < frames.size()) {
      if (!frames[f].voiced) {
        ++f;
        continue;
      }
      std::size_t g = f;
      std::vector<double> run_f0;
      while (g < frames.size() && frames[g].voiced) run_f0.push_back(frames[g++].f0_hz);
      const std::size_t begin = f * hop;
      const std::size_t end = std::min(pcm.size(), (g - 1) * hop + frame_len);
      const std::size_t breaks_before = track.breaks.size();
      track_cycles(pcm.subspan(begin, end - begin), sample_rate, run_f0, hop, track);
      if (track.breaks.size() == breaks_before && !track.periods.empty()) track.breaks.push_back(track.periods.size());
      f = g;
    }
    features.jitter_pct = perturbation_pct(track.periods, track.breaks);
    features.shimmer_pct = perturbation_pct(track.amplitudes, track.breaks);
  }

  // Tempo: peaks of the smoothed RMS envelope above its mean.
  if (!envelope.empty()) {
    const int half = std::max(0, config.envelope_smoothing_frames / 2);
    std::vector<double> smooth(envelope.size());
    for (std::size_t i = 0; i < envelope.size(); ++i) {
      const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
      const std::size_t hi = std::min(envelope.size() - 1, i + half);
      double acc = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) acc += envelope[j];
      smooth[i] = acc / static_cast<double>(hi - lo + 1);
    }
    const double m = mean_of(smooth);
    const double threshold = m * (1.0 + config.envelope_min_prominence);
    std::size_t peaks = 0;
    for (std::size_t i = 1; i + 1 < smooth.size(); ++i) {
      if (smooth[i] > threshold && smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1]) ++peaks;
    }
    features.tempo_peaks_per_s = static_cast<double>(peaks) / (static_cast<double>(pcm.size()) / sample_rate);
  }
  return features;
}

}  // namespace emosura::bench
