#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emosura/core.hpp"

namespace emosura::bench {

struct AffectRating {
  double mean = 4.0;
  std::optional<double> std;  // annotator standard deviation, 1-7 scale
};

/// One benchmark utterance as stored in a JSONL manifest.
struct SampleRecord {
  std::string sample_id;
  std::string audio;  // path relative to the audio root
  double duration_s = 0.0;
  AffectRating valence;
  AffectRating arousal;
  std::optional<double> dominance;
  std::string reference_caption;
  std::map<std::string, std::string> generated_captions;  // system_id -> caption
  /// Ratings on a 1-5 scale. Key "" holds a plain list that applies to every
  /// system of the sample; other keys are system ids.
  std::map<std::string, std::vector<int>> human_mos;
  std::optional<json> perturbation;

  /// Sample whose audio this record uses (differs for perturbed copies).
  std::string audio_sample_id() const;
  /// Ratings for one system, falling back to the sample-wide list.
  const std::vector<int>* mos_for(const std::string& system_id) const;
};

/// Validation failure for one record (bad ranges, missing fields).
class RecordError : public Error {
 public:
  using Error::Error;
};

void to_json(json& j, const SampleRecord& r);
/// Throws RecordError on missing/ill-typed fields or out-of-range values.
/// Missing annotation stds are allowed here (curation rejects them later).
void from_json(const json& j, SampleRecord& r);

struct ManifestLine {
  std::size_t line = 0;
  std::optional<SampleRecord> record;
  std::string error;       // set when record is empty
  std::string sample_id;   // best effort, for reject reports
};

/// Reads JSONL; never throws for bad lines (they come back with `error`).
std::vector<ManifestLine> read_manifest_lines(std::istream& in);
/// Reads JSONL and throws RecordError on the first bad line.
std::vector<SampleRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records);
std::string to_jsonl_line(const SampleRecord& record);

}  // namespace emosura::bench
