#pragma once

// Three-stage benchmark curation: duration window, annotator consensus, and
// capped stratified sampling over a 10x10 valence-arousal grid.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "emosura/bench/sample_record.hpp"

namespace emosura::bench {

inline constexpr double kMinDurationS = 3.0;
inline constexpr double kMaxDurationS = 8.0;
inline constexpr double kMaxRatingStd = 1.5;
inline constexpr int kGridSize = 10;
inline constexpr std::size_t kDefaultBinCap = 15;

class MissingAnnotationStats : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Keep iff 3.0 <= duration <= 8.0 (both bounds inclusive).
bool filter_duration(const SampleRecord& record);

/// Keep iff both valence and arousal std <= 1.5. Throws
/// MissingAnnotationStats when either std is absent.
bool filter_consensus(const SampleRecord& record);

struct GridBin {
  int row = 0;  // valence
  int col = 0;  // arousal

  friend auto operator<=>(const GridBin&, const GridBin&) = default;
};

/// floor((x - 1) / 0.6) per axis, clamped to 9. Throws OutOfRange outside [1,7].
GridBin assign_bin(double valence_mean, double arousal_mean);

/// Per bin: ascending by valence.std + arousal.std, ties by sample_id; keep
/// min(cap, size). Output is ordered by bin, then rank. Independent of input
/// order.
std::vector<SampleRecord> stratified_sample(const std::vector<SampleRecord>& records,
                                            std::size_t cap = kDefaultBinCap);

struct Reject {
  std::string sample_id;
  std::string reason;
  std::size_t line = 0;
};

struct CurationResult {
  std::vector<SampleRecord> selected;
  std::vector<Reject> rejects;
  std::array<std::array<std::size_t, kGridSize>, kGridSize> bin_counts{};  // selected per bin
};

/// duration -> consensus -> stratified sampling. Records missing stds are
/// rejected with a reason rather than aborting.
CurationResult curate(const std::vector<SampleRecord>& records, std::size_t cap = kDefaultBinCap);

/// "row,col,count" with a header, one line per non-empty bin.
std::string bins_csv(const CurationResult& result);

}  // namespace emosura::bench
