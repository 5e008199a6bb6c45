#include "emosura/bench/perturb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "emosura/text.hpp"

namespace emosura::bench {

namespace {

std::string match_case(std::string_view matched, std::string replacement) {
  bool any_alpha = false;
  bool all_upper = true;
  for (const char c : matched) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      any_alpha = true;
      if (!std::isupper(static_cast<unsigned char>(c))) all_upper = false;
    }
  }
  if (any_alpha && all_upper && matched.size() > 1) {
    for (auto& c : replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (!matched.empty() && std::isupper(static_cast<unsigned char>(matched.front())) && !replacement.empty()) {
    replacement.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
  }
  return replacement;
}

std::vector<SubstitutionRule> load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open perturbation lexicon " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return PerturbLexicon::parse_tsv(ss.str());
}

}  // namespace

std::string_view to_string(PerturbationType type) {
  switch (type) {
    case PerturbationType::A: return "A";
    case PerturbationType::B: return "B";
    case PerturbationType::C: return "C";
    case PerturbationType::D: return "D";
  }
  return "?";
}

std::optional<PerturbationType> parse_perturbation_type(std::string_view text) {
  const auto t = text::to_lower(text::trim(text));
  if (t == "a" || t == "a_emotion_flip") return PerturbationType::A;
  if (t == "b" || t == "b_attribute_swap") return PerturbationType::B;
  if (t == "c" || t == "c_event_fabrication") return PerturbationType::C;
  if (t == "d" || t == "d_mixed") return PerturbationType::D;
  return std::nullopt;
}

std::vector<PerturbationType> parse_perturbation_types(std::string_view csv) {
  std::vector<PerturbationType> out;
  for (const auto& part : text::split(csv, ',')) {
    if (text::trim(part).empty()) continue;
    const auto t = parse_perturbation_type(part);
    if (!t) throw Error("unknown perturbation type: " + part);
    if (std::find(out.begin(), out.end(), *t) == out.end()) out.push_back(*t);
  }
  return out;
}

std::vector<SubstitutionRule> PerturbLexicon::parse_tsv(std::string_view tsv) {
  std::vector<SubstitutionRule> rules;
  std::size_t lineno = 0;
  for (const auto& raw : text::split(tsv, '\n')) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() < 3) throw Error("lexicon line " + std::to_string(lineno) + ": expected 3 tab-separated columns");
    const auto attr = parse_attribute(text::trim(cols[2]));
    if (!attr) throw Error("lexicon line " + std::to_string(lineno) + ": unknown attribute " + cols[2]);
    rules.push_back({std::string(text::trim(cols[0])), std::string(text::trim(cols[1])), *attr});
  }
  return rules;
}

PerturbLexicon PerturbLexicon::load(const std::filesystem::path& dir) {
  PerturbLexicon lex;
  lex.emotion = load_file(dir / "emotion.tsv");
  lex.gender = load_file(dir / "gender.tsv");
  lex.event = load_file(dir / "event.tsv");
  lex.acoustic = load_file(dir / "acoustic.tsv");
  return lex;
}

AttributeSet target_attributes(PerturbationType type) {
  switch (type) {
    case PerturbationType::A: return {Attribute::Emotion};
    case PerturbationType::B: return {Attribute::Gender, Attribute::Pitch, Attribute::Texture};
    case PerturbationType::C: return {Attribute::VocalEvent};
    case PerturbationType::D: return {};
  }
  return {};
}

std::vector<SubstitutionRule> PerturbLexicon::rules_for(PerturbationType type) const {
  std::vector<SubstitutionRule> out;
  const auto take = [&](const std::vector<SubstitutionRule>& rules, const AttributeSet& allowed) {
    for (const auto& r : rules) {
      if (allowed.empty() || allowed.contains(r.attribute)) out.push_back(r);
    }
  };
  switch (type) {
    case PerturbationType::A: take(emotion, target_attributes(type)); break;
    case PerturbationType::B:
      take(gender, target_attributes(type));
      take(acoustic, target_attributes(type));
      break;
    case PerturbationType::C: take(event, target_attributes(type)); break;
    case PerturbationType::D:
      take(gender, {});
      take(event, {});
      take(acoustic, {});
      take(emotion, {});
      break;
  }
  return out;
}

json to_json(const PerturbationSpec& spec) {
  json subs = json::array();
  for (const auto& s : spec.substitutions) {
    subs.push_back({{"original_offset", s.original_offset},
                    {"original", s.original},
                    {"new_offset", s.new_offset},
                    {"replacement", s.replacement},
                    {"attribute", to_string(s.attribute)}});
  }
  return {{"type", to_string(spec.type)},
          {"substitutions", subs},
          {"target_attributes", format_attribute_list(spec.target_attributes)}};
}

PerturbationSpec perturbation_from_json(const json& j) {
  PerturbationSpec spec;
  const auto type = parse_perturbation_type(j.at("type").get<std::string>());
  if (!type) throw Error("unknown perturbation type in record");
  spec.type = *type;
  for (const auto& s : j.at("substitutions")) {
    Substitution sub;
    sub.original_offset = s.at("original_offset").get<std::size_t>();
    sub.original = s.at("original").get<std::string>();
    sub.new_offset = s.at("new_offset").get<std::size_t>();
    sub.replacement = s.at("replacement").get<std::string>();
    const auto attr = parse_attribute(s.at("attribute").get<std::string>());
    if (!attr) throw Error("unknown attribute in perturbation record");
    sub.attribute = *attr;
    spec.substitutions.push_back(std::move(sub));
  }
  spec.target_attributes = parse_attribute_list(j.value("target_attributes", std::string{}));
  return spec;
}

PerturbationResult perturb(std::string_view caption, const PerturbLexicon& lexicon, PerturbationType type,
                           const APUSet* apus) {
  const auto rules = lexicon.rules_for(type);
  std::vector<std::string> terms;
  terms.reserve(rules.size());
  for (const auto& r : rules) terms.push_back(r.match);
  const auto hits = text::scan_terms(caption, terms);

  if (hits.empty()) {
    throw NoSubstitutableSpan("no substitutable span for type " + std::string(to_string(type)));
  }
  if (type == PerturbationType::B) {
    const bool has_gender = std::any_of(hits.begin(), hits.end(), [&](const text::TermHit& h) {
      return rules[h.term_index].attribute == Attribute::Gender;
    });
    if (!has_gender) throw NoSubstitutableSpan("no gender term to swap for type B");
  }

  PerturbationResult result;
  result.spec.type = type;
  result.spec.target_attributes = target_attributes(type);
  std::size_t cursor = 0;
  for (const auto& hit : hits) {
    result.caption.append(caption.substr(cursor, hit.offset - cursor));
    const auto& rule = rules[hit.term_index];
    Substitution sub;
    sub.original_offset = hit.offset;
    sub.original = std::string(caption.substr(hit.offset, hit.length));
    sub.new_offset = result.caption.size();
    sub.replacement = match_case(sub.original, rule.replacement);
    sub.attribute = rule.attribute;
    result.caption.append(sub.replacement);
    result.spec.substitutions.push_back(std::move(sub));
    cursor = hit.offset + hit.length;
  }
  result.caption.append(caption.substr(cursor));
  if (apus) result.audit = audit_substitutions(caption, result.spec, *apus);
  return result;
}

std::vector<AuditIssue> audit_substitutions(std::string_view original, const PerturbationSpec& spec,
                                            const APUSet& apus) {
  std::vector<AuditIssue> issues;
  const auto& allowed = spec.target_attributes;
  for (std::size_t i = 0; i < spec.substitutions.size(); ++i) {
    const auto& sub = spec.substitutions[i];
    if (!allowed.empty() && !allowed.contains(sub.attribute)) {
      issues.push_back({i, "rule attribute " + std::string(to_string(sub.attribute)) + " outside target"});
      continue;
    }
    if (allowed.empty()) continue;
    const std::size_t lo = sub.original_offset;
    const std::size_t hi = lo + sub.original.size();
    for (const auto& apu : apus.units) {
      if (apu.evidence.empty()) continue;
      // Every occurrence of the evidence span counts.
      for (std::size_t at = text::ifind(original, apu.evidence); at != std::string_view::npos;) {
        const std::size_t end = at + apu.evidence.size();
        if (at < hi && lo < end && !allowed.contains(apu.attribute)) {
          issues.push_back({i, "overlaps evidence of " + apu.identifier + " (" +
                                   std::string(to_string(apu.attribute)) + ")"});
          break;
        }
        const auto next = text::ifind(original.substr(at + 1), apu.evidence);
        at = next == std::string_view::npos ? next : at + 1 + next;
      }
    }
  }
  return issues;
}

std::string invert_perturbation(std::string_view perturbed, const PerturbationSpec& spec) {
  std::string out(perturbed);
  for (auto it = spec.substitutions.rbegin(); it != spec.substitutions.rend(); ++it) {
    if (it->new_offset + it->replacement.size() > out.size() ||
        out.compare(it->new_offset, it->replacement.size(), it->replacement) != 0) {
      throw Error("perturbed text does not contain recorded replacement '" + it->replacement + "'");
    }
    out.replace(it->new_offset, it->replacement.size(), it->original);
  }
  return out;
}

}  // namespace emosura::bench
