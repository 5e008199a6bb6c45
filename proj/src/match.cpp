#include "emosura/match.hpp"

#include <algorithm>
#include <map>

#include "emosura/json_recovery.hpp"
#include "emosura/log.hpp"
#include "emosura/text.hpp"

namespace emosura {

namespace {

constexpr std::string_view kMatchHead =
    R"(You are now a audio-linguistic expert in matching two set of primitive information units generated from two captions.

The set of primitive information units is represented as a list of dict [{"fact": [UNIT], "identifier": [ID]}...] within JSON format. In addition, each primitive information unit in the oracle set would be accompanied with a unique "id".

To match primitive information units, read each unit of the set and decide whether its fact is semantically equivalent to, or entailed by, a unit of the oracle set. A unit matches an oracle unit when both describe the same attribute of the speaker's voice or emotion with compatible values. Paraphrases match; contradicting values do not. When several oracle units qualify, choose the closest one.

IMPORTANT: Please consider each primitive information unit in the set individually. You should only output the matching results formatted as:
[{"fact": [UNIT], "identifier": [ID], "matched_oracle_id": [ORACLE ID]}...]

The "identifier" is optional. For key named "matched_oracle_id", the value should be the corresponding "id". If not matched, set "matched_oracle_id" to "None".

> > > Oracle Set: )";

bool is_none_token(const json& value) {
  if (value.is_null()) return true;
  if (!value.is_string()) return false;
  const std::string v = text::to_lower(text::trim(value.get<std::string>()));
  return v.empty() || v == "none" || v == "null";
}

}  // namespace

std::string build_matching_prompt(const APUSet& generated, const APUSet& reference) {
  json oracle = json::array();
  for (const auto& unit : reference.units) oracle.push_back(json{{"fact", unit.fact}, {"id", unit.identifier}});
  json candidates = json::array();
  for (const auto& unit : generated.units) {
    candidates.push_back(json{{"fact", unit.fact}, {"identifier", unit.identifier}});
  }
  std::string prompt(kMatchHead);
  prompt += oracle.dump(-1, ' ', false, json::error_handler_t::replace);
  prompt += "\n> > > Set of Primitive information units: ";
  prompt += candidates.dump(-1, ' ', false, json::error_handler_t::replace);
  return prompt;
}

ParsedMatches parse_match_response(std::string_view raw, const APUSet& generated,
                                   const std::set<std::string>& oracle_ids) {
  ParsedMatches parsed;
  std::map<std::string, std::optional<std::string>> assigned;
  const auto array = extract_json_array(raw);
  if (!array) {
    parsed.match_format_failed = true;
  } else {
    for (const auto& entry : *array) {
      if (!entry.is_object()) {
        ++parsed.dropped_entries;
        continue;
      }
      std::string id;
      if (const auto it = entry.find("identifier"); it != entry.end() && it->is_string()) {
        id = text::trim(it->get<std::string>());
      } else if (const auto f = entry.find("fact"); f != entry.end() && f->is_string()) {
        // Identifier is optional in the response; fall back to the fact text.
        const std::string fact(text::trim(f->get<std::string>()));
        for (const auto& unit : generated.units) {
          if (!assigned.contains(unit.identifier) && text::iequals(text::trim(unit.fact), fact)) {
            id = unit.identifier;
            break;
          }
        }
      }
      const bool known = std::any_of(generated.units.begin(), generated.units.end(),
                                     [&](const APU& u) { return u.identifier == id; });
      if (!known) {
        ++parsed.dropped_entries;
        log::debug("dropping match entry with unknown identifier", {{"identifier", id}});
        continue;
      }
      if (assigned.contains(id)) continue;  // first entry per id wins

      std::optional<std::string> target;
      const auto m = entry.find("matched_oracle_id");
      if (m != entry.end() && !is_none_token(*m)) {
        if (m->is_string() && oracle_ids.contains(std::string(text::trim(m->get<std::string>())))) {
          target = std::string(text::trim(m->get<std::string>()));
        } else {
          ++parsed.coerced_ids;
        }
      }
      assigned.emplace(id, std::move(target));
    }
  }

  parsed.pairs.reserve(generated.units.size());
  for (const auto& unit : generated.units) {
    const auto it = assigned.find(unit.identifier);
    parsed.pairs.push_back({unit.identifier, it == assigned.end() ? std::nullopt : it->second});
  }
  return parsed;
}

MatchResult compute_match_sets(const std::vector<MatchPair>& pairs, const VerificationResult& verification,
                               const APUSet& reference) {
  std::set<std::string> reference_ids;
  for (const auto& unit : reference.units) reference_ids.insert(unit.identifier);

  MatchResult result;
  result.pairs = pairs;
  std::set<std::string> matched_generated;
  for (const auto& pair : pairs) {
    if (!pair.oracle_id || !reference_ids.contains(*pair.oracle_id)) continue;
    result.matched_oracle_ids.insert(*pair.oracle_id);
    matched_generated.insert(pair.generated_id);
  }
  for (const auto& id : verification.verified_ids) {
    if (!matched_generated.contains(id)) result.extra_verified_ids.insert(id);
  }
  return result;
}

ScoreCounts count_sets(const APUSet& generated, const APUSet& reference,
                       const VerificationResult& verification, const MatchResult& match,
                       const AttributeSet* filter) {
  std::map<std::string, Attribute> generated_attr;
  for (const auto& unit : generated.units) generated_attr.emplace(unit.identifier, unit.attribute);
  std::map<std::string, Attribute> reference_attr;
  for (const auto& unit : reference.units) reference_attr.emplace(unit.identifier, unit.attribute);

  const auto keep = [&](const std::map<std::string, Attribute>& attrs, const std::string& id) {
    const auto it = attrs.find(id);
    if (it == attrs.end()) return false;
    return filter == nullptr || filter->contains(it->second);
  };

  ScoreCounts counts;
  for (const auto& unit : generated.units) counts.generated += keep(generated_attr, unit.identifier);
  for (const auto& unit : reference.units) counts.reference += keep(reference_attr, unit.identifier);
  for (const auto& id : verification.verified_ids) counts.verified += keep(generated_attr, id);
  for (const auto& id : match.matched_oracle_ids) counts.matched += keep(reference_attr, id);
  for (const auto& id : match.extra_verified_ids) counts.extra += keep(generated_attr, id);
  return counts;
}

ParsedMatches match_units(const APUSet& generated, const APUSet& reference, ModelClient& client,
                          const std::string& sample_id, const MatchOptions& options) {
  std::set<std::string> oracle_ids;
  for (const auto& unit : reference.units) oracle_ids.insert(unit.identifier);

  if (generated.units.empty() || reference.units.empty()) {
    return parse_match_response("[]", generated, oracle_ids);
  }

  ChatRequest request;
  request.model_id = options.model_id;
  request.messages.push_back({"user", build_matching_prompt(generated, reference), std::nullopt});
  RequestTag tag{Stage::Match, sample_id, generated.caption_id, {}};

  const auto reply = client.complete(request, tag, [&](const std::string& raw) {
    const auto parsed = parse_match_response(raw, generated, oracle_ids);
    json pairs = json::array();
    for (const auto& p : parsed.pairs) {
      pairs.push_back(json{{"identifier", p.generated_id},
                           {"matched_oracle_id", p.oracle_id ? json(*p.oracle_id) : json(nullptr)}});
    }
    return json{{"caption_id", generated.caption_id}, {"pairs", std::move(pairs)}};
  });

  auto parsed = parse_match_response(reply.text, generated, oracle_ids);
  if (parsed.match_format_failed) {
    log::warn("matching format failure", {{"caption_id", generated.caption_id}});
  }
  return parsed;
}

MatchAndScore score_matched(const APUSet& generated, const APUSet& reference,
                            const VerificationResult& verification, const ParsedMatches& parsed,
                            const AttributeSet& descriptive_attributes) {
  MatchAndScore out;
  out.match = compute_match_sets(parsed.pairs, verification, reference);
  out.match.match_format_failed = parsed.match_format_failed;
  out.all_counts = count_sets(generated, reference, verification, out.match);
  out.descriptive_counts = count_sets(generated, reference, verification, out.match, &descriptive_attributes);
  out.score = emosura_final(score_counts(out.all_counts, Scope::All),
                            score_counts(out.descriptive_counts, Scope::Descriptive));
  out.score.caption_id = generated.caption_id;
  return out;
}

MatchAndScore match_and_score(const APUSet& generated, const APUSet& reference,
                              const VerificationResult& verification, ModelClient& client,
                              const std::string& sample_id, const MatchOptions& options) {
  const auto parsed = match_units(generated, reference, client, sample_id, options);
  return score_matched(generated, reference, verification, parsed, options.descriptive_attributes);
}

}  // namespace emosura
