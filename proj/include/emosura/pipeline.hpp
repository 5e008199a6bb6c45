#pragma once

// End-to-end scoring of a manifest: decompose, verify, match, score, and
// the rule-based baselines, collected into a RunManifest.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emosura/backend.hpp"
#include "emosura/bench/sample_record.hpp"
#include "emosura/core.hpp"
#include "emosura/decompose.hpp"
#include "emosura/match.hpp"
#include "emosura/verify.hpp"

namespace emosura {

enum class SampleStatus { Scored, FormatFailed, Errored };

std::string_view to_string(SampleStatus status);
SampleStatus parse_sample_status(std::string_view text);

struct BaselineScores {
  std::optional<double> bleu4;
  std::optional<double> rouge_l;
  std::optional<double> cider_d;
};

/// Intermediate artifacts, kept in memory for the stage subcommands.
struct SystemTrace {
  APUSet generated;
  std::optional<VerificationResult> verification;
  std::optional<ParsedMatches> matches;
};

struct SystemResult {
  std::string system_id;
  SampleStatus status = SampleStatus::Scored;
  std::string error;
  std::size_t caption_chars = 0;
  std::optional<EmoSuraScore> score;
  ScoreCounts all_counts;
  ScoreCounts descriptive_counts;
  bool decompose_format_failed = false;
  bool match_format_failed = false;
  std::size_t verdicts = 0;
  std::size_t verify_format_failures = 0;
  BaselineScores baselines;
  std::optional<double> mos_mean;

  SystemTrace trace;  // not serialized
};

struct SampleResult {
  std::string sample_id;
  SampleStatus status = SampleStatus::Scored;
  std::string error;
  std::size_t reference_units = 0;
  bool reference_format_failed = false;
  std::optional<std::string> perturbation_type;
  std::vector<SystemResult> systems;  // ordered by system_id

  std::optional<APUSet> reference;  // not serialized
};

struct BackendIdentity {
  std::string text_model;
  std::string audio_model;
  std::string text_endpoint;   // host only
  std::string audio_endpoint;  // host only
};

struct RunManifest {
  std::string run_id;
  std::string config_digest;
  json config;  // effective configuration, secrets excluded
  BackendIdentity backends;
  std::string input_manifest_digest;
  std::map<std::string, std::string> cache_digests;
  std::vector<SampleResult> samples;
  std::string started_at;
  std::string finished_at;

  bool any_errored() const;
};

/// Timestamps are kept under a separate "timestamps" key so the rest of
/// the document is reproducible.
json to_json(const RunManifest& run);
RunManifest run_manifest_from_json(const json& j);

enum class StopAfter { Decompose, Verify, Match };

struct PipelineOptions {
  DecomposeOptions decompose;
  VerifyOptions verify;
  MatchOptions match;
  bool gt_context = true;
  std::filesystem::path audio_root;
  std::size_t jobs = 1;
  StopAfter stop_after = StopAfter::Match;
  bool baselines = true;
};

struct PipelineClients {
  ModelClient* text = nullptr;
  ModelClient* audio = nullptr;
};

/// Scores every record. Per-sample failures become `errored` entries;
/// MissingFixture propagates with the sample id in its message.
std::vector<SampleResult> run_pipeline(const std::vector<bench::SampleRecord>& records,
                                       const PipelineClients& clients, const PipelineOptions& options);

/// Fills BLEU-4, ROUGE-L and CIDEr-D for every system caption with a
/// non-empty reference. CIDEr-D is skipped when fewer than two items qualify.
void add_baselines(const std::vector<bench::SampleRecord>& records, std::vector<SampleResult>& results);

std::string digest_manifest_file(const std::filesystem::path& path);

}  // namespace emosura
