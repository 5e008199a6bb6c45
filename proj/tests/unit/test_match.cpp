#include <doctest.h>

#include <memory>

#include "emosura/match.hpp"
#include "fake_backend.hpp"
#include "test_support.hpp"

using namespace emosura;

namespace {

APU unit(const std::string& id, Attribute a, const std::string& fact, Origin o = Origin::Generated) {
  return {fact, a, "v", "", id, o};
}

APUSet generated_set() {
  return {"s1/sys",
          Origin::Generated,
          {unit("g1", Attribute::Pitch, "The speaker's pitch is low."),
           unit("g2", Attribute::Emotion, "The speaker sounds calm."),
           unit("g3", Attribute::Gender, "The speaker's gender is male.")},
          false};
}

APUSet reference_set() {
  return {"s1/ref",
          Origin::Reference,
          {unit("r1", Attribute::Gender, "The speaker's gender is male.", Origin::Reference),
           unit("r2", Attribute::Pitch, "The speaker's pitch is low.", Origin::Reference),
           unit("r3", Attribute::Rate, "The speaker's speaking rate is slow.", Origin::Reference)},
          false};
}

const std::set<std::string> kOracleIds{"r1", "r2", "r3"};

}  // namespace

TEST_CASE("missing entries default to unmatched") {
  const auto parsed = parse_match_response(
      R"([{"fact":"The speaker's pitch is low.","identifier":"g1","matched_oracle_id":"r2"}])", generated_set(),
      kOracleIds);
  REQUIRE(parsed.pairs.size() == 3);
  CHECK(parsed.pairs[0] == MatchPair{"g1", "r2"});
  CHECK(parsed.pairs[1] == MatchPair{"g2", std::nullopt});
  CHECK(parsed.pairs[2] == MatchPair{"g3", std::nullopt});
  CHECK_FALSE(parsed.match_format_failed);
}

TEST_CASE("none tokens and hallucinated ids") {
  const auto parsed = parse_match_response(R"([
    {"identifier":"g1","matched_oracle_id":"None"},
    {"identifier":"g2","matched_oracle_id":null},
    {"identifier":"g3","matched_oracle_id":"r99"}])", generated_set(), kOracleIds);
  for (const auto& p : parsed.pairs) CHECK_FALSE(p.oracle_id.has_value());
  CHECK(parsed.coerced_ids == 1);
  const auto sets = compute_match_sets(parsed.pairs, make_verification("c", {}), reference_set());
  CHECK(sets.matched_oracle_ids.empty());
}

TEST_CASE("identifier falls back to the fact text") {
  const auto parsed = parse_match_response(
      R"([{"fact":"the speaker's gender is male.","matched_oracle_id":"r1"}])", generated_set(), kOracleIds);
  CHECK(parsed.pairs[2] == MatchPair{"g3", "r1"});
}

TEST_CASE("unknown generated ids are dropped; first entry per id wins") {
  const auto parsed = parse_match_response(R"([
    {"identifier":"g7","matched_oracle_id":"r1"},
    {"identifier":"g1","matched_oracle_id":"r2"},
    {"identifier":"g1","matched_oracle_id":"r3"},
    "junk"])", generated_set(), kOracleIds);
  CHECK(parsed.dropped_entries == 2);
  CHECK(parsed.pairs[0] == MatchPair{"g1", "r2"});
}

TEST_CASE("unparseable response flags a format failure and leaves all unmatched") {
  const auto parsed = parse_match_response("I think g1 matches r2.", generated_set(), kOracleIds);
  CHECK(parsed.match_format_failed);
  REQUIRE(parsed.pairs.size() == 3);
  for (const auto& p : parsed.pairs) CHECK_FALSE(p.oracle_id.has_value());
}

TEST_CASE("Q counts distinct reference units; extras are verified and unmatched") {
  const std::vector<MatchPair> pairs{{"g1", "r2"}, {"g2", "r2"}, {"g3", std::nullopt}};
  const auto verification =
      make_verification("c", {{"g1", Decision::No, ""}, {"g2", Decision::Yes, ""}, {"g3", Decision::Yes, ""}});
  const auto sets = compute_match_sets(pairs, verification, reference_set());
  CHECK(sets.matched_oracle_ids == std::set<std::string>{"r2"});
  CHECK(sets.extra_verified_ids == std::set<std::string>{"g3"});

  const auto all = count_sets(generated_set(), reference_set(), verification, sets);
  CHECK(all == ScoreCounts{3, 2, 3, 1, 1});
  const auto descriptive_attrs = default_descriptive_attributes();
  const auto desc = count_sets(generated_set(), reference_set(), verification, sets, &descriptive_attrs);
  CHECK(desc == ScoreCounts{2, 1, 2, 1, 0});
}

TEST_CASE("matching prompt lists the oracle ids and candidate identifiers") {
  const auto prompt = build_matching_prompt(generated_set(), reference_set());
  CHECK(prompt.find(R"("id":"r3")") != std::string::npos);
  CHECK(prompt.find(R"("identifier":"g2")") != std::string::npos);
  CHECK(prompt.find("Oracle Set: ") < prompt.find("Set of Primitive information units: "));
}

TEST_CASE("match_and_score end to end with a scripted backend") {
  auto backend = std::make_shared<testsupport::ScriptedBackend>([](const ChatRequest&, const RequestTag&) {
    return std::string(R"([{"identifier":"g1","matched_oracle_id":"r2"},{"identifier":"g2","matched_oracle_id":"None"},
                           {"identifier":"g3","matched_oracle_id":"r1"}])");
  });
  ModelClient client(backend, nullptr);
  const auto verification =
      make_verification("c", {{"g1", Decision::Yes, ""}, {"g2", Decision::Yes, ""}, {"g3", Decision::No, ""}});
  const auto out = match_and_score(generated_set(), reference_set(), verification, client, "s1");
  // all: P=3, Pt=2, O=3, Q=2, extra=1 -> s_p=2/3, s_r=3/4
  CHECK(out.score.all.s_p == doctest::Approx(2.0 / 3.0));
  CHECK(out.score.all.s_r == doctest::Approx(0.75));
  CHECK(out.score.all.s_f == doctest::Approx(2.0 * (2.0 / 3.0) * 0.75 / (2.0 / 3.0 + 0.75)));
  // descriptive: P=2, Pt=2, O=2, Q=1, extra=1 -> s_p=1, s_r=2/3
  CHECK(out.score.descriptive.s_f == doctest::Approx(0.8));
  CHECK(backend->calls() == 1);
}

TEST_CASE("empty sets skip the backend call") {
  auto backend = std::make_shared<testsupport::ScriptedBackend>([](const ChatRequest&, const RequestTag&) { return std::string("[]"); });
  ModelClient client(backend, nullptr);
  APUSet empty{"s1/sys", Origin::Generated, {}, false};
  const auto parsed = match_units(empty, reference_set(), client, "s1");
  CHECK(parsed.pairs.empty());
  CHECK(backend->calls() == 0);
}
