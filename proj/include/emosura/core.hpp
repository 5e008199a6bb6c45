#pragma once

// Domain types shared by the evaluation pipeline and the pure scoring engine.

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace emosura {

using json = nlohmann::json;

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Attribute tag of an atomic perceptual unit. The first five come from the
/// decomposition schema; the rest are enabled by the extended-attribute flag.
enum class Attribute {
  Pitch,
  Rate,
  Volume,
  Gender,
  Emotion,
  VocalEvent,
  Texture,
  TempoDynamics,
};

using AttributeSet = std::set<Attribute>;

std::string_view to_string(Attribute attribute);
std::optional<Attribute> parse_attribute(std::string_view text);

/// {pitch, rate, volume, gender, emotion}
AttributeSet base_attributes();
/// base_attributes() plus {vocal_event, texture, tempo_dynamics}
AttributeSet extended_attributes();
/// {pitch, rate, volume, emotion}; gender is identity, not description.
AttributeSet default_descriptive_attributes();

/// Parses a comma-separated attribute list ("pitch,rate"). Throws Error on
/// an unknown tag.
AttributeSet parse_attribute_list(std::string_view csv);
std::string format_attribute_list(const AttributeSet& set);

enum class Origin { Generated, Reference };

std::string_view to_string(Origin origin);

/// One atomic perceptual unit: a standalone declarative sentence about a
/// single vocal or emotional attribute.
struct APU {
  std::string fact;
  Attribute attribute = Attribute::Emotion;
  std::string value;
  std::string evidence;
  std::string identifier;
  Origin origin = Origin::Generated;

  friend bool operator==(const APU&, const APU&) = default;
};

struct APUSet {
  std::string caption_id;
  Origin origin = Origin::Generated;
  std::vector<APU> units;
  bool format_failed = false;

  friend bool operator==(const APUSet&, const APUSet&) = default;
};

void to_json(json& j, const APU& apu);
void from_json(const json& j, APU& apu);
void to_json(json& j, const APUSet& set);
void from_json(const json& j, APUSet& set);

enum class Decision { Yes, No, FormatFailure };

std::string_view to_string(Decision decision);
Decision parse_decision_name(std::string_view name);

struct Verdict {
  std::string apu_id;
  Decision decision = Decision::FormatFailure;
  std::string raw_response;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct VerificationResult {
  std::string caption_id;
  std::vector<Verdict> verdicts;
  std::set<std::string> verified_ids;

  std::size_t format_failures() const;
};

/// Rebuilds verified_ids from the verdict list (ids whose decision is Yes).
VerificationResult make_verification(std::string caption_id, std::vector<Verdict> verdicts);

struct MatchPair {
  std::string generated_id;
  std::optional<std::string> oracle_id;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::set<std::string> matched_oracle_ids;  // Q
  std::set<std::string> extra_verified_ids;  // verified, matched to nothing
  bool match_format_failed = false;
};

enum class Scope { All, Descriptive };

std::string_view to_string(Scope scope);

struct ScoreBreakdown {
  double s_p = 0.0;
  double s_r = 0.0;
  double s_f = 0.0;
  Scope scope = Scope::All;
};

struct EmoSuraScore {
  std::string caption_id;
  ScoreBreakdown all;
  ScoreBreakdown descriptive{0.0, 0.0, 0.0, Scope::Descriptive};
  double final_score = 0.0;
};

/// Set sizes feeding the precision/recall formulas for one scope.
struct ScoreCounts {
  std::size_t generated = 0;  // |P|
  std::size_t verified = 0;   // |P_true|
  std::size_t reference = 0;  // |O|
  std::size_t matched = 0;    // |Q|
  std::size_t extra = 0;      // verified generated units with no match

  friend bool operator==(const ScoreCounts&, const ScoreCounts&) = default;
};

// Scoring. All functions are total: degenerate denominators yield 0.

double precision_score(const VerificationResult& verification, std::size_t total_units);
double precision_score(std::size_t verified, std::size_t total_units);
double recall_score(std::size_t matched_ref, std::size_t ref_total, std::size_t extra_verified);
double f1(double s_p, double s_r);
EmoSuraScore emosura_final(const ScoreBreakdown& all, const ScoreBreakdown& descriptive);
bool is_descriptive(const APU& apu, const AttributeSet& descriptive_attributes);

ScoreBreakdown score_counts(const ScoreCounts& counts, Scope scope);

}  // namespace emosura
