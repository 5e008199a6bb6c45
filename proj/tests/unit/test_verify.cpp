#include <doctest.h>

#include <atomic>
#include <memory>

#include "emosura/verify.hpp"
#include "fake_backend.hpp"
#include "test_support.hpp"

using namespace emosura;

TEST_CASE("verdict parsing table") {
  struct Row {
    const char* raw;
    Decision expected;
  };
  const Row rows[] = {
      {"1", Decision::Yes},
      {"0", Decision::No},
      {"Yes", Decision::Yes},
      {"No.", Decision::No},
      {"  TRUE \n", Decision::Yes},
      {"false!", Decision::No},
      {"yes, the speaker is male", Decision::Yes},
      {"0\nThe pitch is high.", Decision::No},
      {"It depends on the prosody", Decision::FormatFailure},
      {"", Decision::FormatFailure},
      {"10", Decision::FormatFailure},
      {"Maybe", Decision::FormatFailure},
      {"The answer is 1", Decision::FormatFailure},
  };
  for (const auto& r : rows) {
    CAPTURE(r.raw);
    CHECK(parse_verdict(r.raw) == r.expected);
  }
}

TEST_CASE("verification prompt carries the fact last and the ground truth") {
  APU apu{"The speaker sounds calm.", Attribute::Emotion, "calm", "calm", "g1", Origin::Generated};
  const auto prompt = build_verification_prompt(apu, "A calm male voice.");
  CHECK(prompt.ends_with("> Fact: The speaker sounds calm."));
  CHECK(prompt.find("A calm male voice.") != std::string::npos);
  CHECK(prompt.find("1 → the fact is correct") != std::string::npos);
}

TEST_CASE("format failure rate") {
  CHECK(format_failure_rate({}) == 0.0);
  CHECK(format_failure_rate({{"g1", Decision::Yes, ""}, {"g2", Decision::FormatFailure, ""}}) == 0.5);
}

namespace {

APUSet three_units() {
  APUSet set{"s1/sys", Origin::Generated, {}, false};
  for (int i = 1; i <= 3; ++i) {
    set.units.push_back({"Fact number " + std::to_string(i) + ".", Attribute::Emotion, "calm", "",
                         "g" + std::to_string(i), Origin::Generated});
  }
  return set;
}

}  // namespace

TEST_CASE("one verdict per unit, in unit order, audio attached") {
  testsupport::TempDir dir("verify");
  auto backend = std::make_shared<testsupport::ScriptedBackend>([](const ChatRequest& req, const RequestTag& tag) {
    REQUIRE(req.has_audio());
    return tag.bare_id == "g2" ? std::string("0") : std::string("1");
  });
  ModelClient client(backend, nullptr, testsupport::fast_retry());
  const auto attachment = AudioAttachment::from_bytes({1, 2, 3, 4});
  const AudioRef audio{"s1", "a.wav", 4.0, attachment.content_digest};
  VerifyOptions options;
  options.max_inflight = 3;
  const auto result = verify_apus(three_units(), audio, attachment, "gt", client, options);
  REQUIRE(result.verdicts.size() == 3);
  CHECK(result.verdicts[0].apu_id == "g1");
  CHECK(result.verdicts[1].decision == Decision::No);
  CHECK(result.verified_ids == std::set<std::string>{"g1", "g3"});
  CHECK(backend->calls() == 3);
}

TEST_CASE("transport failure becomes a format failure for that unit only") {
  auto backend = std::make_shared<testsupport::ScriptedBackend>([](const ChatRequest&, const RequestTag& tag) {
    if (tag.bare_id == "g3") throw TimeoutError("deadline exceeded");
    return std::string("yes");
  });
  ModelClient client(backend, nullptr, testsupport::fast_retry(2));
  const auto attachment = AudioAttachment::from_bytes({9, 9});
  const AudioRef audio{"s1", "a.wav", 4.0, attachment.content_digest};
  const auto result = verify_apus(three_units(), audio, attachment, "", client);
  CHECK(result.verdicts[2].decision == Decision::FormatFailure);
  CHECK(result.verdicts[2].raw_response.find("deadline exceeded") != std::string::npos);
  CHECK(result.format_failures() == 1);
  CHECK(result.verified_ids.size() == 2);
  CHECK(backend->calls() == 4);  // two attempts for g3
}

TEST_CASE("reference units are not audio-verified") {
  auto backend = std::make_shared<testsupport::ScriptedBackend>([](const ChatRequest&, const RequestTag&) { return std::string("1"); });
  ModelClient client(backend, nullptr);
  auto set = three_units();
  set.origin = Origin::Reference;
  const auto attachment = AudioAttachment::from_bytes({1});
  CHECK_THROWS_AS(verify_apus(set, {"s1", "a", 1.0, ""}, attachment, "", client), Error);
}

TEST_CASE("load_audio digests bytes and validates duration") {
  testsupport::TempDir dir("audio");
  testsupport::spit(dir / "a.wav", "RIFFxxxx");
  testsupport::spit(dir / "b.wav", "RIFFxxxx");
  const auto [ref_a, att_a] = load_audio("s1", dir / "a.wav", 3.5);
  const auto [ref_b, att_b] = load_audio("s2", dir / "b.wav", 3.5);
  CHECK(att_a.size() == 8);
  CHECK(ref_a.content_digest == ref_b.content_digest);
  CHECK_THROWS_AS(load_audio("s1", dir / "a.wav", 0.0), Error);
  CHECK_THROWS_AS(load_audio("s1", dir / "missing.wav", 3.0), Error);
}
