#include "emosura/bench/curation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace emosura::bench {

namespace {

// Decimal inputs such as 2.8 land a hair below a bin edge after the
// subtraction; the tolerance keeps them in the bin they name.
constexpr double kEdgeTolerance = 1e-9;

int axis_bin(double x) {
  const double scaled = (x - 1.0) * 10.0 / 6.0;
  const int bin = static_cast<int>(std::floor(scaled + kEdgeTolerance));
  return std::clamp(bin, 0, kGridSize - 1);
}

double combined_std(const SampleRecord& r) { return r.valence.std.value_or(0.0) + r.arousal.std.value_or(0.0); }

}  // namespace

bool filter_duration(const SampleRecord& record) {
  return record.duration_s >= kMinDurationS && record.duration_s <= kMaxDurationS;
}

bool filter_consensus(const SampleRecord& record) {
  if (!record.valence.std || !record.arousal.std) {
    throw MissingAnnotationStats("sample " + record.sample_id + " lacks valence/arousal std");
  }
  return *record.valence.std <= kMaxRatingStd && *record.arousal.std <= kMaxRatingStd;
}

GridBin assign_bin(double valence_mean, double arousal_mean) {
  const auto check = [](double x, const char* axis) {
    if (!(x >= 1.0 && x <= 7.0)) throw OutOfRange(std::string(axis) + " mean outside [1,7]");
  };
  check(valence_mean, "valence");
  check(arousal_mean, "arousal");
  return {axis_bin(valence_mean), axis_bin(arousal_mean)};
}

std::vector<SampleRecord> stratified_sample(const std::vector<SampleRecord>& records, std::size_t cap) {
  std::map<GridBin, std::vector<const SampleRecord*>> bins;
  for (const auto& r : records) bins[assign_bin(r.valence.mean, r.arousal.mean)].push_back(&r);

  std::vector<SampleRecord> selected;
  for (auto& [bin, members] : bins) {
    std::sort(members.begin(), members.end(), [](const SampleRecord* a, const SampleRecord* b) {
      const double sa = combined_std(*a);
      const double sb = combined_std(*b);
      if (sa != sb) return sa < sb;
      return a->sample_id < b->sample_id;
    });
    const std::size_t take = std::min(cap, members.size());
    for (std::size_t i = 0; i < take; ++i) selected.push_back(*members[i]);
  }
  return selected;
}

CurationResult curate(const std::vector<SampleRecord>& records, std::size_t cap) {
  CurationResult result;
  std::vector<SampleRecord> kept;
  for (const auto& r : records) {
    if (!filter_duration(r)) {
      result.rejects.push_back({r.sample_id, "duration outside [3.0, 8.0] s"});
      continue;
    }
    try {
      if (!filter_consensus(r)) {
        result.rejects.push_back({r.sample_id, "valence/arousal std above 1.5"});
        continue;
      }
    } catch (const MissingAnnotationStats& e) {
      result.rejects.push_back({r.sample_id, std::string("MissingAnnotationStats: ") + e.what()});
      continue;
    }
    kept.push_back(r);
  }
  result.selected = stratified_sample(kept, cap);
  for (const auto& r : result.selected) {
    const auto bin = assign_bin(r.valence.mean, r.arousal.mean);
    ++result.bin_counts[bin.row][bin.col];
  }
  return result;
}

std::string bins_csv(const CurationResult& result) {
  std::ostringstream out;
  out << "row,col,count\n";
  for (int row = 0; row < kGridSize; ++row) {
    for (int col = 0; col < kGridSize; ++col) {
      if (const auto n = result.bin_counts[row][col]; n > 0) out << row << ',' << col << ',' << n << '\n';
    }
  }
  return out.str();
}

}  // namespace emosura::bench
