#include "emosura/mock_backend.hpp"

#include <fstream>
#include <sstream>

#include "emosura/json_recovery.hpp"
#include "emosura/text.hpp"

namespace emosura {

namespace {

struct FactTemplate {
  Attribute attribute;
  std::string_view prefix;
  std::string_view suffix;
};

constexpr FactTemplate kTemplates[] = {
    {Attribute::Gender, "The speaker's gender is ", "."},
    {Attribute::Pitch, "The speaker's pitch is ", "."},
    {Attribute::Rate, "The speaker's speaking rate is ", "."},
    {Attribute::Volume, "The speaker's volume is ", "."},
    {Attribute::Emotion, "The speaker sounds ", "."},
    {Attribute::VocalEvent, "The speaker is ", "."},
    {Attribute::Texture, "The speaker's voice texture is ", "."},
    {Attribute::TempoDynamics, "The speaker's tempo is ", "."},
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string_view after_marker(std::string_view text, std::string_view marker) {
  const auto pos = text.rfind(marker);
  if (pos == std::string_view::npos) return {};
  return text.substr(pos + marker.size());
}

std::string prompt_text(const ChatRequest& request) {
  std::string all;
  for (const auto& m : request.messages) all += m.text;
  return all;
}

}  // namespace

KeywordLexicon KeywordLexicon::from_tsv(std::string_view tsv) {
  KeywordLexicon lexicon;
  std::size_t lineno = 0;
  for (const auto& line : text::split(tsv, '\n')) {
    ++lineno;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto cols = text::split(trimmed, '\t');
    if (cols.size() < 3) throw Error("lexicon line " + std::to_string(lineno) + ": expected 3 columns");
    const auto attribute = parse_attribute(cols[1]);
    if (!attribute) throw Error("lexicon line " + std::to_string(lineno) + ": unknown attribute " + cols[1]);
    lexicon.entries.push_back(
        {std::string(text::trim(cols[0])), *attribute, text::to_lower(text::trim(cols[2]))});
  }
  return lexicon;
}

KeywordLexicon KeywordLexicon::load(const std::filesystem::path& path) { return from_tsv(read_file(path)); }

TruthTable truth_table_from_json(const json& j) {
  TruthTable table;
  for (auto sample = j.begin(); sample != j.end(); ++sample) {
    auto& attrs = table[sample.key()];
    for (auto attr = sample->begin(); attr != sample->end(); ++attr) {
      const auto attribute = parse_attribute(attr.key());
      if (!attribute) throw Error("truth table: unknown attribute " + attr.key());
      auto& values = attrs[*attribute];
      if (attr->is_string()) {
        values.insert(text::to_lower(attr->get<std::string>()));
      } else {
        for (const auto& v : *attr) values.insert(text::to_lower(v.get<std::string>()));
      }
    }
  }
  return table;
}

MockConfig load_mock_fixture(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "mock.json";
  const auto spec = json::parse(read_file(manifest_path), nullptr, false);
  if (spec.is_discarded() || !spec.is_object()) throw Error("invalid mock fixture " + manifest_path.string());

  MockConfig config;
  const auto mode = spec.value("mode", std::string{"table"});
  if (mode == "oracle") {
    config.mode = MockConfig::Mode::Oracle;
  } else if (mode != "table") {
    throw Error("unknown mock mode: " + mode);
  }
  config.strict = spec.value("strict", false);
  config.default_response = spec.value("default_response", config.default_response);
  if (spec.contains("table")) {
    for (auto it = spec["table"].begin(); it != spec["table"].end(); ++it) {
      config.table[it.key()] = it->get<std::string>();
    }
  }
  if (spec.contains("truth")) {
    const auto& truth = spec["truth"];
    config.truth = truth.is_string() ? truth_table_from_json(json::parse(read_file(dir / truth.get<std::string>())))
                                     : truth_table_from_json(truth);
  }
  if (spec.contains("lexicon")) config.lexicon = KeywordLexicon::load(dir / spec["lexicon"].get<std::string>());
  return config;
}

std::string oracle_fact(Attribute attribute, const std::string& value) {
  for (const auto& t : kTemplates) {
    if (t.attribute == attribute) return std::string(t.prefix) + value + std::string(t.suffix);
  }
  return "The speaker's " + std::string(to_string(attribute)) + " is " + value + ".";
}

std::vector<APU> oracle_decompose(std::string_view caption, const KeywordLexicon& lexicon) {
  std::vector<std::string> terms;
  terms.reserve(lexicon.entries.size());
  for (const auto& e : lexicon.entries) terms.push_back(e.term);

  std::vector<APU> units;
  std::set<std::pair<Attribute, std::string>> seen;
  for (const auto& hit : text::scan_terms(caption, terms)) {
    const auto& entry = lexicon.entries[hit.term_index];
    if (!seen.emplace(entry.attribute, entry.value).second) continue;
    APU unit;
    unit.attribute = entry.attribute;
    unit.value = entry.value;
    unit.fact = oracle_fact(entry.attribute, entry.value);
    unit.evidence = std::string(caption.substr(hit.offset, hit.length));
    units.push_back(std::move(unit));
  }
  return units;
}

MockBackend::MockBackend(MockConfig config) : config_(std::move(config)) {}

std::size_t MockBackend::calls() const {
  const std::lock_guard lock(mutex_);
  return calls_;
}

std::optional<std::string> MockBackend::from_table(const RequestTag& tag) const {
  const std::string stage(to_string(tag.stage));
  for (const auto& key : {tag.key, tag.bare_id, tag.sample_id}) {
    if (key.empty()) continue;
    if (const auto it = config_.table.find(stage + ":" + key); it != config_.table.end()) return it->second;
  }
  return std::nullopt;
}

std::string MockBackend::complete(const ChatRequest& request, const RequestTag& tag) {
  {
    const std::lock_guard lock(mutex_);
    ++calls_;
  }
  if (auto hit = from_table(tag)) return *hit;
  if (config_.mode == MockConfig::Mode::Oracle) return oracle_answer(request, tag);
  if (config_.strict) {
    throw MissingFixture("no mock fixture for " + std::string(to_string(tag.stage)) + " key '" + tag.key +
                         "' (sample " + tag.sample_id + ")");
  }
  return config_.default_response;
}

std::string MockBackend::oracle_answer(const ChatRequest& request, const RequestTag& tag) const {
  const std::string prompt = prompt_text(request);
  switch (tag.stage) {
    case Stage::Decompose: {
      const auto caption = after_marker(prompt, "### Input Text\n");
      json out = json::array();
      for (const auto& unit : oracle_decompose(caption, config_.lexicon)) {
        out.push_back(json{{"fact", unit.fact},
                           {"attribute", to_string(unit.attribute)},
                           {"value", unit.value},
                           {"evidence", unit.evidence}});
      }
      return out.dump(4);
    }
    case Stage::Verify:
      return oracle_verify(prompt, tag);
    case Stage::Match: {
      const auto oracle_part = after_marker(prompt, "Oracle Set: ");
      const auto candidate_part = after_marker(prompt, "Set of Primitive information units: ");
      const auto oracle = extract_json_array(first_balanced_array(oracle_part));
      const auto candidates = extract_json_array(first_balanced_array(candidate_part));
      json out = json::array();
      if (!oracle || !candidates) return out.dump();
      for (const auto& c : *candidates) {
        const auto fact = c.value("fact", std::string{});
        json matched = "None";
        for (const auto& o : *oracle) {
          if (text::iequals(text::trim(o.value("fact", std::string{})), text::trim(fact))) {
            matched = o.value("id", std::string{});
            break;
          }
        }
        out.push_back(json{{"fact", fact},
                           {"identifier", c.value("identifier", std::string{})},
                           {"matched_oracle_id", matched}});
      }
      return out.dump();
    }
  }
  return config_.default_response;
}

std::string MockBackend::oracle_verify(std::string_view prompt, const RequestTag& tag) const {
  const auto truth = config_.truth.find(tag.sample_id);
  if (truth == config_.truth.end()) {
    if (config_.strict) throw MissingFixture("no truth-table entry for sample " + tag.sample_id);
    return config_.default_response;
  }
  const auto fact = text::trim(after_marker(prompt, "> Fact: "));

  std::vector<std::pair<Attribute, std::string>> claims;
  for (const auto& t : kTemplates) {
    if (fact.size() > t.prefix.size() + t.suffix.size() && fact.substr(0, t.prefix.size()) == t.prefix &&
        fact.substr(fact.size() - t.suffix.size()) == t.suffix) {
      claims.emplace_back(t.attribute, text::to_lower(fact.substr(
                                           t.prefix.size(), fact.size() - t.prefix.size() - t.suffix.size())));
      break;
    }
  }
  if (claims.empty()) {
    for (const auto& unit : oracle_decompose(fact, config_.lexicon)) claims.emplace_back(unit.attribute, unit.value);
  }
  if (claims.empty()) return "0";
  for (const auto& [attribute, value] : claims) {
    const auto values = truth->second.find(attribute);
    if (values == truth->second.end() || !values->second.contains(value)) return "0";
  }
  return "1";
}

}  // namespace emosura
