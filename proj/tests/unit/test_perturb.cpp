#include <doctest.h>

#include "emosura/bench/detection.hpp"
#include "emosura/bench/perturb.hpp"
#include "test_support.hpp"

using namespace emosura;
using namespace emosura::bench;

namespace {

const PerturbLexicon& lexicon() {
  static const PerturbLexicon lex = PerturbLexicon::load(testsupport::source_dir() / "data" / "lexicon");
  return lex;
}

}  // namespace

TEST_CASE("gender swap carries the pitch descriptor along") {
  const auto r = perturb("His voice is deep", lexicon(), PerturbationType::B);
  CHECK(r.caption == "Her voice is high-pitched");
  REQUIRE(r.spec.substitutions.size() == 2);
  CHECK(r.spec.substitutions[0].original == "His");
  CHECK(r.spec.substitutions[0].replacement == "Her");
  CHECK(r.spec.substitutions[0].attribute == Attribute::Gender);
  CHECK(r.spec.substitutions[1].original == "deep");
  CHECK(r.spec.substitutions[1].replacement == "high-pitched");
  CHECK(invert_perturbation(r.caption, r.spec) == "His voice is deep");
}

TEST_CASE("type B needs a gender span") {
  CHECK_THROWS_AS(perturb("The voice is deep", lexicon(), PerturbationType::B), NoSubstitutableSpan);
}

TEST_CASE("emotion flip only touches emotion terms") {
  const auto r = perturb("A male speaker sounds confident and calm, speaking slowly.", lexicon(), PerturbationType::A);
  CHECK(r.caption == "A male speaker sounds anxious and agitated, speaking slowly.");
  for (const auto& s : r.spec.substitutions) CHECK(s.attribute == Attribute::Emotion);
  CHECK(r.spec.target_attributes == AttributeSet{Attribute::Emotion});
  CHECK_THROWS_AS(perturb("A male speaker talks slowly.", lexicon(), PerturbationType::A), NoSubstitutableSpan);
}

TEST_CASE("event fabrication replaces speech verbs") {
  const auto r = perturb("She delivers the line in a clear voice.", lexicon(), PerturbationType::C);
  CHECK(r.caption == "She sings the line in a musical voice.");
}

TEST_CASE("mixed type alters several categories at once") {
  const std::string caption = "A male speaker delivers his words loudly, sounding poised and confident.";
  const auto r = perturb(caption, lexicon(), PerturbationType::D);
  std::set<Attribute> touched;
  for (const auto& s : r.spec.substitutions) touched.insert(s.attribute);
  CHECK(touched.contains(Attribute::Gender));
  CHECK(touched.contains(Attribute::Emotion));
  CHECK(touched.contains(Attribute::VocalEvent));
  CHECK(touched.contains(Attribute::Volume));
  CHECK(r.caption == "A female speaker sings her words softly, sounding furious and anxious.");
  CHECK(invert_perturbation(r.caption, r.spec) == caption);
}

TEST_CASE("case is preserved") {
  CHECK(perturb("HE IS CALM. Calm indeed.", lexicon(), PerturbationType::A).caption == "HE IS AGITATED. Agitated indeed.");
}

TEST_CASE("perturbation records round trip through JSON and guard inversion") {
  const auto r = perturb("His voice is deep and he sounds happy", lexicon(), PerturbationType::D);
  const auto back = perturbation_from_json(to_json(r.spec));
  CHECK(back.type == PerturbationType::D);
  REQUIRE(back.substitutions.size() == r.spec.substitutions.size());
  CHECK(invert_perturbation(r.caption, back) == "His voice is deep and he sounds happy");
  CHECK_THROWS_AS(invert_perturbation("something else entirely", back), Error);
}

TEST_CASE("audit flags spans outside the target categories") {
  APUSet apus{"s/ref", Origin::Reference, {}, false};
  apus.units.push_back({"The speaker sounds calm.", Attribute::Emotion, "calm", "calm", "r1", Origin::Reference});
  apus.units.push_back({"The speaker's pitch is low.", Attribute::Pitch, "low", "deep", "r2", Origin::Reference});
  const auto ok = perturb("A deep voice, calm.", lexicon(), PerturbationType::A, &apus);
  CHECK(ok.audit.empty());

  PerturbationSpec forged;
  forged.type = PerturbationType::A;
  forged.target_attributes = target_attributes(PerturbationType::A);
  forged.substitutions.push_back({2, "deep", 2, "high-pitched", Attribute::Emotion});
  const auto issues = audit_substitutions("A deep voice, calm.", forged, apus);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].substitution == 0);
}

TEST_CASE("type names") {
  CHECK(parse_perturbation_type("b") == PerturbationType::B);
  CHECK(parse_perturbation_type("C_event_fabrication") == PerturbationType::C);
  CHECK_FALSE(parse_perturbation_type("E"));
  CHECK(parse_perturbation_types("A,D").size() == 2);
  CHECK_THROWS_AS(parse_perturbation_types("A,Z"), Error);
}

TEST_CASE("detection rate arithmetic") {
  std::vector<DetectionEvent> events;
  for (int i = 0; i < 120; ++i) events.push_back({"acoustic", i < 112});
  for (int i = 0; i < 40; ++i) events.push_back({"gender", i < 39});
  const auto table = detection_rate(events);
  CHECK(table.at("acoustic").rate_text() == "93.33");
  CHECK(*table.at("acoustic").rate_pct() == doctest::Approx(93.3333333));
  CHECK(table.at("gender").rate_text() == "97.50");
  CHECK(DetectionRow{}.rate_text() == "n/a");
  CHECK_FALSE(DetectionRow{}.rate_pct());
  CHECK(is_detected(0.4, 0.5));
  CHECK_FALSE(is_detected(0.5, 0.5));
}
