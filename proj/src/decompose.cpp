#include "emosura/decompose.hpp"

#include <cctype>
#include <chrono>
#include <ctime>
#include <set>

#include "emosura/json_recovery.hpp"
#include "emosura/log.hpp"
#include "emosura/text.hpp"

namespace emosura {

namespace {

constexpr std::string_view kPromptHead = R"(### Persona
You are an expert linguistic analyst. Your specialty is deconstructing descriptive text into verifiable, primitive information units that characterize vocal, speech, and emotional patterns.

### Task
Analyze the provided input text. For each vocal, speech, or emotional characteristic you identify, extract it as a primitive information unit. Your output must be a JSON list of objects, where each object represents a single, verifiable attribute found in the text.

### Rules
1. Read the input text carefully to identify keywords, phrases, and pronouns that provide direct evidence about vocal and emotional characteristics.
2. For each piece of evidence, create a corresponding JSON object in the output list.
3. The "fact" key must contain a complete, standalone sentence describing the characteristic.
4. The "evidence" key must contain the exact quote from the input text that supports the fact.
5. If no evidence is present for a particular attribute, do not create an object for it.
6. Your final output must be only the JSON list and nothing else.

### Output Schema and Allowed Terms
Each object in the JSON list must conform to the following structure:
- fact: (string) A complete sentence describing the attribute.
- attribute: (string) Must be one of: )";

constexpr std::string_view kPromptTail = R"(.
- value: (string) The specific term for the attribute. Allowed terms are:
  - For "pitch": "low", "normal", "high".
  - For "rate": "slow", "normal", "fast".
- evidence: (string) The exact substring from the input text.

### Examples

Example 1
Input: "His voice is deep..."
Output:
[
    {
        "fact": "The speaker's gender is male.",
        "attribute": "gender",
        "value": "male",
        "evidence": "His"
    }
]

### Input Text
)";

std::string quoted_attribute_list(const AttributeSet& allowed) {
  std::string out;
  for (const auto attribute : allowed) {
    if (!out.empty()) out += ", ";
    out += '"';
    out += to_string(attribute);
    out += '"';
  }
  return out;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool in(std::string_view v, std::initializer_list<std::string_view> options) {
  for (const auto o : options) {
    if (v == o) return true;
  }
  return false;
}

std::optional<std::string> string_field(const json& object, const char* key) {
  const auto it = object.find(key);
  if (it == object.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

std::string build_decomposition_prompt(std::string_view caption, const AttributeSet& allowed) {
  if (text::trim(caption).empty()) throw EmptyCaption("caption is empty");
  std::string prompt;
  prompt.reserve(kPromptHead.size() + kPromptTail.size() + caption.size() + 96);
  prompt += kPromptHead;
  prompt += quoted_attribute_list(allowed);
  prompt += kPromptTail;
  prompt += caption;
  return prompt;
}

std::string normalize_value(Attribute attribute, std::string_view value) {
  const std::string v = text::to_lower(text::trim(value));
  if (v.empty()) return {};
  switch (attribute) {
    case Attribute::Pitch:
      return in(v, {"low", "normal", "high"}) ? v : std::string{};
    case Attribute::Rate:
      return in(v, {"slow", "normal", "fast"}) ? v : std::string{};
    case Attribute::Volume:
      if (in(v, {"quiet", "soft", "low", "subdued", "gentle"})) return "quiet";
      if (in(v, {"loud", "high", "booming"})) return "loud";
      if (in(v, {"normal", "moderate", "medium", "average"})) return "normal";
      return {};
    case Attribute::Gender:
      if (in(v, {"male", "man", "masculine"})) return "male";
      if (in(v, {"female", "woman", "feminine"})) return "female";
      return {};
    case Attribute::Emotion:
    case Attribute::VocalEvent:
    case Attribute::Texture:
    case Attribute::TempoDynamics:
      return v;
  }
  return {};
}

bool is_single_sentence(std::string_view fact) {
  const auto body = text::trim(fact);
  if (body.empty()) return false;
  for (std::size_t i = 0; i + 1 < body.size(); ++i) {
    const char c = body[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    // Runs like "..." or "?!" are one terminator.
    while (j < body.size() && (body[j] == '.' || body[j] == '!' || body[j] == '?' || body[j] == '"' ||
                               body[j] == '\'')) {
      ++j;
    }
    if (j < body.size() && std::isspace(static_cast<unsigned char>(body[j])) != 0) {
      if (!text::trim(body.substr(j)).empty()) return false;
    }
    i = j - 1;
  }
  return true;
}

ParseOutcome parse_apu_response_detailed(std::string_view raw, std::string_view source_caption,
                                         Origin origin, const AttributeSet& allowed) {
  ParseOutcome outcome;
  outcome.set.origin = origin;
  const auto array = extract_json_array(raw);
  if (!array) {
    outcome.set.format_failed = true;
    return outcome;
  }
  outcome.array_elements = array->size();
  const char prefix = origin == Origin::Generated ? 'g' : 'r';

  for (std::size_t index = 0; index < array->size(); ++index) {
    const auto& element = (*array)[index];
    const auto drop = [&](std::string reason) {
      outcome.dropped.push_back({index, std::move(reason)});
    };
    if (!element.is_object()) {
      drop("element is not an object");
      continue;
    }
    const auto fact = string_field(element, "fact");
    if (!fact || text::trim(*fact).empty()) {
      drop("missing or empty fact");
      continue;
    }
    if (!is_single_sentence(*fact)) {
      drop("fact is not a single sentence");
      continue;
    }
    const auto attribute_text = string_field(element, "attribute");
    const auto attribute = attribute_text ? parse_attribute(*attribute_text) : std::nullopt;
    if (!attribute || !allowed.contains(*attribute)) {
      drop("unknown attribute: " + attribute_text.value_or("<missing>"));
      continue;
    }
    const auto value_text = string_field(element, "value");
    std::string value = value_text ? normalize_value(*attribute, *value_text) : std::string{};
    if (value.empty()) {
      drop("disallowed value for " + std::string(to_string(*attribute)) + ": " +
           value_text.value_or("<missing>"));
      continue;
    }

    APU apu;
    apu.fact = std::string(text::trim(*fact));
    apu.attribute = *attribute;
    apu.value = std::move(value);
    apu.evidence = string_field(element, "evidence").value_or("");
    if (!apu.evidence.empty() && text::ifind(source_caption, apu.evidence) == std::string_view::npos) {
      apu.evidence.clear();
      ++outcome.evidence_cleared;
    }
    apu.origin = origin;
    apu.identifier = prefix + std::to_string(outcome.set.units.size() + 1);
    outcome.set.units.push_back(std::move(apu));
  }
  return outcome;
}

APUSet parse_apu_response(std::string_view raw, std::string_view source_caption, Origin origin,
                          const AttributeSet& allowed) {
  return parse_apu_response_detailed(raw, source_caption, origin, allowed).set;
}

APUSet decompose_caption(const CaptionRef& caption, ModelClient& client,
                         const DecomposeOptions& options) {
  ChatRequest request;
  request.model_id = options.model_id;
  request.messages.push_back(
      {"user", build_decomposition_prompt(caption.text, options.allowed_attributes), std::nullopt});

  RequestTag tag{Stage::Decompose, caption.sample_id, caption.caption_id, {}};
  const auto parse = [&](const std::string& raw) {
    auto outcome =
        parse_apu_response_detailed(raw, caption.text, caption.origin, options.allowed_attributes);
    outcome.set.caption_id = caption.caption_id;
    return outcome;
  };

  const auto reply = client.complete(request, tag, [&](const std::string& raw) {
    const auto outcome = parse(raw);
    return json{{"caption_id", caption.caption_id},
                {"parsed_units", outcome.set.units},
                {"format_failed", outcome.set.format_failed},
                {"timestamp", iso_timestamp()}};
  });

  auto outcome = parse(reply.text);
  for (const auto& d : outcome.dropped) {
    log::info("dropped decomposed unit",
              {{"caption_id", caption.caption_id}, {"index", d.index}, {"reason", d.reason}});
  }
  if (outcome.set.format_failed) {
    log::warn("decomposition format failure", {{"caption_id", caption.caption_id}});
  }
  return std::move(outcome.set);
}

}  // namespace emosura
