#include <doctest.h>

#include <memory>

#include "emosura/decompose.hpp"
#include "fake_backend.hpp"
#include "test_support.hpp"

using namespace emosura;

TEST_CASE("prompt ends with the caption verbatim after the input header") {
  const std::string caption = "His voice is deep...";
  const auto prompt = build_decomposition_prompt(caption);
  const std::string marker = "### Input Text\n";
  const auto pos = prompt.rfind(marker);
  REQUIRE(pos != std::string::npos);
  CHECK(prompt.substr(pos + marker.size()) == caption);
  CHECK(prompt.find(R"("pitch": "low", "normal", "high")") != std::string::npos);
  CHECK(prompt.find(R"("rate": "slow", "normal", "fast")") != std::string::npos);
  CHECK(prompt.find(R"(Must be one of: "pitch", "rate", "volume", "gender", "emotion")") != std::string::npos);
  CHECK(prompt.find("vocal_event") == std::string::npos);
}

TEST_CASE("extended attributes widen the schema line") {
  const auto prompt = build_decomposition_prompt("x", extended_attributes());
  CHECK(prompt.find(R"("vocal_event", "texture", "tempo_dynamics")") != std::string::npos);
}

TEST_CASE("blank captions are rejected") {
  CHECK_THROWS_AS(build_decomposition_prompt(""), EmptyCaption);
  CHECK_THROWS_AS(build_decomposition_prompt("  \n\t"), EmptyCaption);
}

TEST_CASE("the example output parses into one gender unit") {
  const auto set = parse_apu_response(
      R"([{"fact":"The speaker's gender is male.","attribute":"gender","value":"male","evidence":"His"}])",
      "His voice is deep...");
  REQUIRE(set.units.size() == 1);
  CHECK_FALSE(set.format_failed);
  CHECK(set.units[0].attribute == Attribute::Gender);
  CHECK(set.units[0].value == "male");
  CHECK(set.units[0].evidence == "His");
  CHECK(set.units[0].identifier == "g1");
}

TEST_CASE("empty list is valid and distinct from a format failure") {
  const auto empty = parse_apu_response("[]", "x");
  CHECK(empty.units.empty());
  CHECK_FALSE(empty.format_failed);
  const auto broken = parse_apu_response("I could not find any attributes.", "x");
  CHECK(broken.units.empty());
  CHECK(broken.format_failed);
}

TEST_CASE("wrapped responses are recovered") {
  const std::string body = R"([{"fact":"The speaker sounds calm.","attribute":"emotion","value":"calm","evidence":"calm"}])";
  const std::vector<std::string> variants = {
      "Sure! Here are the facts: " + body,
      "```json\n" + body + "\n```",
      "```\n" + body + "\n```",
      "Here you go:\n```json\n" + body + "\n```\nHope this helps!",
      body + "\n\nExplanation: the caption says calm.",
      "\n\n   " + body,
      "Output:\n" + body,
      "JSON:" + body,
      "Result -> " + body + " <- end",
      "```JSON\n" + body + "```",
  };
  for (const auto& v : variants) {
    CAPTURE(v);
    const auto set = parse_apu_response(v, "She sounds calm.");
    CHECK_FALSE(set.format_failed);
    REQUIRE(set.units.size() == 1);
    CHECK(set.units[0].value == "calm");
  }
}

TEST_CASE("invalid elements are dropped with reasons and ids stay dense") {
  const auto outcome = parse_apu_response_detailed(R"([
    {"fact":"The speaker's pitch is low.","attribute":"pitch","value":"Low","evidence":"deep"},
    {"fact":"The pitch is very low.","attribute":"pitch","value":"very low","evidence":"deep"},
    {"fact":"","attribute":"emotion","value":"calm"},
    {"fact":"The speaker has an accent.","attribute":"accent","value":"british"},
    {"fact":"The speaker is calm. They are relaxed.","attribute":"emotion","value":"calm"},
    42,
    {"fact":"The speaker talks slowly.","attribute":"rate","value":"slow","evidence":"SLOWLY"}
  ])", "A deep voice speaking slowly.", Origin::Reference);
  REQUIRE(outcome.set.units.size() == 2);
  CHECK(outcome.array_elements == 7);
  CHECK(outcome.dropped.size() == 5);
  CHECK(outcome.set.units[0].identifier == "r1");
  CHECK(outcome.set.units[0].value == "low");
  CHECK(outcome.set.units[1].identifier == "r2");
  CHECK(outcome.set.units[1].attribute == Attribute::Rate);
  CHECK(outcome.dropped[0].index == 1);
}

TEST_CASE("evidence missing from the caption is cleared, not dropped") {
  const auto outcome = parse_apu_response_detailed(
      R"([{"fact":"The speaker sounds calm.","attribute":"emotion","value":"calm","evidence":"serene"}])",
      "She sounds calm.");
  REQUIRE(outcome.set.units.size() == 1);
  CHECK(outcome.set.units[0].evidence.empty());
  CHECK(outcome.evidence_cleared == 1);
}

TEST_CASE("attributes outside the allowed set are dropped") {
  const std::string raw = R"([{"fact":"The speaker laughs.","attribute":"vocal_event","value":"laughing"}])";
  CHECK(parse_apu_response(raw, "x").units.empty());
  CHECK(parse_apu_response(raw, "x", Origin::Generated, extended_attributes()).units.size() == 1);
}

TEST_CASE("value normalization") {
  CHECK(normalize_value(Attribute::Pitch, " HIGH ") == "high");
  CHECK(normalize_value(Attribute::Pitch, "deep").empty());
  CHECK(normalize_value(Attribute::Rate, "medium").empty());
  CHECK(normalize_value(Attribute::Volume, "soft") == "quiet");
  CHECK(normalize_value(Attribute::Gender, "Woman") == "female");
  CHECK(normalize_value(Attribute::Emotion, "Anxious") == "anxious");
}

TEST_CASE("single sentence check") {
  CHECK(is_single_sentence("The speaker sounds calm."));
  CHECK(is_single_sentence("The speaker sounds calm"));
  CHECK(is_single_sentence("Wow!?"));
  CHECK_FALSE(is_single_sentence("Calm. Relaxed."));
  CHECK_FALSE(is_single_sentence("   "));
}

TEST_CASE("decompose_caption calls the backend once and caches") {
  testsupport::TempDir dir("decompose");
  auto cache = std::make_shared<ResponseCache>(dir.path());
  auto backend = std::make_shared<testsupport::ScriptedBackend>([](const ChatRequest&, const RequestTag&) {
    return std::string(R"([{"fact":"The speaker sounds calm.","attribute":"emotion","value":"calm","evidence":"calm"}])");
  });
  ModelClient client(backend, cache, testsupport::fast_retry());
  const CaptionRef caption{"s1", "s1/sys", "She sounds calm.", Origin::Generated};
  const auto first = decompose_caption(caption, client);
  const auto second = decompose_caption(caption, client);
  CHECK(first == second);
  CHECK(first.caption_id == "s1/sys");
  CHECK(backend->calls() == 1);
  CHECK(cache->size(Stage::Decompose) == 1);
  CHECK(backend->tags[0].stage == Stage::Decompose);
  CHECK_THROWS_AS(decompose_caption({"s1", "s1/x", " ", Origin::Generated}, client), EmptyCaption);
}
