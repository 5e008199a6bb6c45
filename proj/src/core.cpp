#include "emosura/core.hpp"

#include <array>

#include "emosura/text.hpp"

namespace emosura {

namespace {

constexpr std::array<std::pair<Attribute, std::string_view>, 8> kAttributeNames{{
    {Attribute::Pitch, "pitch"},
    {Attribute::Rate, "rate"},
    {Attribute::Volume, "volume"},
    {Attribute::Gender, "gender"},
    {Attribute::Emotion, "emotion"},
    {Attribute::VocalEvent, "vocal_event"},
    {Attribute::Texture, "texture"},
    {Attribute::TempoDynamics, "tempo_dynamics"},
}};

}  // namespace

std::string_view to_string(Attribute attribute) {
  for (const auto& [a, name] : kAttributeNames) {
    if (a == attribute) return name;
  }
  return "unknown";
}

std::optional<Attribute> parse_attribute(std::string_view text) {
  const std::string lowered = text::to_lower(text::trim(text));
  for (const auto& [a, name] : kAttributeNames) {
    if (lowered == name) return a;
  }
  return std::nullopt;
}

AttributeSet base_attributes() {
  return {Attribute::Pitch, Attribute::Rate, Attribute::Volume, Attribute::Gender,
          Attribute::Emotion};
}

AttributeSet extended_attributes() {
  auto set = base_attributes();
  set.insert({Attribute::VocalEvent, Attribute::Texture, Attribute::TempoDynamics});
  return set;
}

AttributeSet default_descriptive_attributes() {
  return {Attribute::Pitch, Attribute::Rate, Attribute::Volume, Attribute::Emotion};
}

AttributeSet parse_attribute_list(std::string_view csv) {
  AttributeSet set;
  for (const auto& part : text::split(csv, ',')) {
    const auto trimmed = text::trim(part);
    if (trimmed.empty()) continue;
    const auto attribute = parse_attribute(trimmed);
    if (!attribute) throw Error("unknown attribute tag: " + std::string(trimmed));
    set.insert(*attribute);
  }
  return set;
}

std::string format_attribute_list(const AttributeSet& set) {
  std::string out;
  for (const auto attribute : set) {
    if (!out.empty()) out += ',';
    out += to_string(attribute);
  }
  return out;
}

std::string_view to_string(Origin origin) {
  return origin == Origin::Generated ? "generated" : "reference";
}

namespace {

Origin parse_origin(std::string_view s) {
  if (s == "generated") return Origin::Generated;
  if (s == "reference") return Origin::Reference;
  throw Error("unknown origin: " + std::string(s));
}

}  // namespace

void to_json(json& j, const APU& apu) {
  j = json{{"fact", apu.fact},
           {"attribute", to_string(apu.attribute)},
           {"value", apu.value},
           {"evidence", apu.evidence},
           {"identifier", apu.identifier},
           {"origin", to_string(apu.origin)}};
}

void from_json(const json& j, APU& apu) {
  apu.fact = j.at("fact").get<std::string>();
  const auto attribute = parse_attribute(j.at("attribute").get<std::string>());
  if (!attribute) throw Error("unknown attribute in APU record");
  apu.attribute = *attribute;
  apu.value = j.at("value").get<std::string>();
  apu.evidence = j.value("evidence", std::string{});
  apu.identifier = j.at("identifier").get<std::string>();
  apu.origin = parse_origin(j.value("origin", std::string{"generated"}));
}

void to_json(json& j, const APUSet& set) {
  j = json{{"caption_id", set.caption_id},
           {"origin", to_string(set.origin)},
           {"units", set.units},
           {"format_failed", set.format_failed}};
}

void from_json(const json& j, APUSet& set) {
  set.caption_id = j.at("caption_id").get<std::string>();
  set.origin = parse_origin(j.at("origin").get<std::string>());
  set.units = j.at("units").get<std::vector<APU>>();
  set.format_failed = j.at("format_failed").get<bool>();
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::Yes:
      return "Yes";
    case Decision::No:
      return "No";
    case Decision::FormatFailure:
      return "FormatFailure";
  }
  return "FormatFailure";
}

Decision parse_decision_name(std::string_view name) {
  if (name == "Yes") return Decision::Yes;
  if (name == "No") return Decision::No;
  if (name == "FormatFailure") return Decision::FormatFailure;
  throw Error("unknown decision: " + std::string(name));
}

std::size_t VerificationResult::format_failures() const {
  std::size_t n = 0;
  for (const auto& v : verdicts) {
    if (v.decision == Decision::FormatFailure) ++n;
  }
  return n;
}

VerificationResult make_verification(std::string caption_id, std::vector<Verdict> verdicts) {
  VerificationResult result;
  result.caption_id = std::move(caption_id);
  for (const auto& v : verdicts) {
    if (v.decision == Decision::Yes) result.verified_ids.insert(v.apu_id);
  }
  result.verdicts = std::move(verdicts);
  return result;
}

std::string_view to_string(Scope scope) { return scope == Scope::All ? "all" : "descriptive"; }

double precision_score(std::size_t verified, std::size_t total_units) {
  if (total_units == 0) return 0.0;
  return static_cast<double>(verified) / static_cast<double>(total_units);
}

double precision_score(const VerificationResult& verification, std::size_t total_units) {
  return precision_score(verification.verified_ids.size(), total_units);
}

double recall_score(std::size_t matched_ref, std::size_t ref_total, std::size_t extra_verified) {
  const std::size_t denominator = ref_total + extra_verified;
  if (denominator == 0) return 0.0;
  return static_cast<double>(matched_ref + extra_verified) / static_cast<double>(denominator);
}

double f1(double s_p, double s_r) {
  if (s_p <= 0.0 || s_r <= 0.0) return 0.0;
  // Reciprocal form rounds exactly on common fractions (3/4, 6/7 -> 0.8).
  return 2.0 / (1.0 / s_p + 1.0 / s_r);
}

EmoSuraScore emosura_final(const ScoreBreakdown& all, const ScoreBreakdown& descriptive) {
  EmoSuraScore score;
  score.all = all;
  score.all.scope = Scope::All;
  score.descriptive = descriptive;
  score.descriptive.scope = Scope::Descriptive;
  score.final_score = (all.s_f + descriptive.s_f) / 2.0;
  return score;
}

bool is_descriptive(const APU& apu, const AttributeSet& descriptive_attributes) {
  return descriptive_attributes.contains(apu.attribute);
}

ScoreBreakdown score_counts(const ScoreCounts& counts, Scope scope) {
  ScoreBreakdown b;
  b.scope = scope;
  if (counts.generated == 0) return b;  // degenerate caption earns no credit
  b.s_p = precision_score(counts.verified, counts.generated);
  b.s_r = recall_score(counts.matched, counts.reference, counts.extra);
  b.s_f = f1(b.s_p, b.s_r);
  return b;
}

}  // namespace emosura
