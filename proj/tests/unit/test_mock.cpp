#include <doctest.h>

#include <memory>

#include "emosura/decompose.hpp"
#include "emosura/match.hpp"
#include "emosura/mock_backend.hpp"
#include "emosura/verify.hpp"
#include "test_support.hpp"

using namespace emosura;

namespace {

const char* kLexicon =
    "# term\tattribute\tvalue\n"
    "male\tgender\tmale\n"
    "deep\tpitch\tlow\n"
    "high-pitched\tpitch\thigh\n"
    "high\tpitch\thigh\n"
    "slowly\trate\tslow\n"
    "calm\temotion\tcalm\n"
    "anxious\temotion\tanxious\n";

MockConfig oracle_config() {
  MockConfig c;
  c.mode = MockConfig::Mode::Oracle;
  c.strict = true;
  c.lexicon = KeywordLexicon::from_tsv(kLexicon);
  c.truth = truth_table_from_json(json::parse(R"({"s1":{"gender":"male","pitch":"low","emotion":["calm"]}})"));
  return c;
}

ChatRequest prompt_request(const std::string& prompt) {
  ChatRequest r;
  r.model_id = "mock";
  r.messages.push_back({"user", prompt, std::nullopt});
  return r;
}

}  // namespace

TEST_CASE("lexicon TSV loading") {
  const auto lex = KeywordLexicon::from_tsv(kLexicon);
  REQUIRE(lex.entries.size() == 7);
  CHECK(lex.entries[1].attribute == Attribute::Pitch);
  CHECK(lex.entries[1].value == "low");
  CHECK_THROWS_AS(KeywordLexicon::from_tsv("loud\tloudness\tloud\n"), Error);
  CHECK_THROWS_AS(KeywordLexicon::from_tsv("loud volume\n"), Error);
}

TEST_CASE("oracle decomposition prefers longer terms and dedupes values") {
  const auto units = oracle_decompose("A male voice, high-pitched and calm, calm again; deep? No, High.",
                                      KeywordLexicon::from_tsv(kLexicon));
  REQUIRE(units.size() == 4);
  CHECK(units[0].attribute == Attribute::Gender);
  CHECK(units[1].value == "high");
  CHECK(units[1].evidence == "high-pitched");
  CHECK(units[2].value == "calm");
  CHECK(units[3].value == "low");
  CHECK(units[0].fact == oracle_fact(Attribute::Gender, "male"));
}

TEST_CASE("table mode answers by stage and key") {
  MockConfig c;
  c.table = {{"verify:g1", "1"}, {"decompose:s1/ref", "[]"}, {"match:s1", "[]"}};
  MockBackend backend(c);
  CHECK(backend.complete(prompt_request("x"), {Stage::Verify, "s1", "s1/sys/g1", "g1"}) == "1");
  CHECK(backend.complete(prompt_request("x"), {Stage::Decompose, "s1", "s1/ref", ""}) == "[]");
  CHECK(backend.complete(prompt_request("x"), {Stage::Match, "s1", "s1/sys", ""}) == "[]");
  CHECK(backend.complete(prompt_request("x"), {Stage::Verify, "s1", "s1/sys/g2", "g2"}) == c.default_response);
  CHECK(backend.calls() == 4);
}

TEST_CASE("strict table mode raises on a missing key") {
  MockConfig c;
  c.strict = true;
  MockBackend backend(c);
  try {
    backend.complete(prompt_request("x"), {Stage::Decompose, "s42", "s42/sys", ""});
    FAIL("expected MissingFixture");
  } catch (const MissingFixture& e) {
    CHECK(std::string(e.what()).find("s42") != std::string::npos);
  }
}

TEST_CASE("oracle verify checks facts against the truth table") {
  MockBackend backend(oracle_config());
  const auto verify = [&](const std::string& fact, const std::string& sample = "s1") {
    APU apu{fact, Attribute::Emotion, "", "", "g1", Origin::Generated};
    return backend.complete(prompt_request(build_verification_prompt(apu, "gt")), {Stage::Verify, sample, "k", "g1"});
  };
  CHECK(verify(oracle_fact(Attribute::Pitch, "low")) == "1");
  CHECK(verify(oracle_fact(Attribute::Pitch, "high")) == "0");
  CHECK(verify(oracle_fact(Attribute::Rate, "slow")) == "0");  // no truth for rate
  CHECK(verify("A deep and calm voice.") == "1");  // free text falls back to the lexicon
  CHECK(verify("The speaker sounds anxious.") == "0");
  CHECK(verify("Nothing recognisable here.") == "0");
  CHECK_THROWS_AS(verify(oracle_fact(Attribute::Pitch, "low"), "s9"), MissingFixture);
}

TEST_CASE("oracle pipeline is self-consistent on truthful captions") {
  auto backend = std::make_shared<MockBackend>(oracle_config());
  ModelClient client(backend, nullptr);
  const std::string caption = "A male speaker with a deep voice sounds calm.";
  const auto gen = decompose_caption({"s1", "s1/sys", caption, Origin::Generated}, client);
  const auto ref = decompose_caption({"s1", "s1/ref", caption, Origin::Reference}, client);
  REQUIRE(gen.units.size() == 3);
  const auto attachment = AudioAttachment::from_bytes({1, 2});
  const auto verification = verify_apus(gen, {"s1", "a.wav", 3.0, attachment.content_digest}, attachment, caption, client);
  CHECK(verification.verified_ids.size() == 3);
  const auto scored = match_and_score(gen, ref, verification, client, "s1");
  CHECK(scored.match.matched_oracle_ids.size() == 3);
  CHECK(scored.score.final_score == 1.0);
}

TEST_CASE("table entries override the oracle") {
  auto config = oracle_config();
  config.table["verify:g1"] = "0";
  MockBackend backend(config);
  APU apu{oracle_fact(Attribute::Pitch, "low"), Attribute::Pitch, "low", "", "g1", Origin::Generated};
  CHECK(backend.complete(prompt_request(build_verification_prompt(apu, "")), {Stage::Verify, "s1", "s1/x/g1", "g1"}) == "0");
}

TEST_CASE("bundled toy fixture loads") {
  const auto config = load_mock_fixture(testsupport::toy_dir() / "mock");
  CHECK(config.mode == MockConfig::Mode::Oracle);
  CHECK(config.strict);
  CHECK(config.truth.size() == 6);
  CHECK(config.lexicon.entries.size() > 20);
  testsupport::TempDir dir("mockfx");
  testsupport::spit(dir / "mock.json", R"({"mode":"psychic"})");
  CHECK_THROWS_AS(load_mock_fixture(dir.path()), Error);
}
