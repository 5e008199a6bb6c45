#include "emosura/verify.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "emosura/log.hpp"
#include "emosura/parallel.hpp"
#include "emosura/text.hpp"

namespace emosura {

namespace {

constexpr std::string_view kVerifyHead = R"(You are an expert audio verifier.

### Task
You will be given a "Fact", an audio file, and a set of "Ground Truth" text. Your task is to determine if the "Fact" is correct.

### Rules
1. Audio is Primary: Your primary judgment must be based only on what is heard in the audio.
2. GT is Secondary: The GT text is a reference.
3. Conflict Resolution Rule: The audio is the ultimate source of truth.

Output
- 1 → the fact is correct
- 0 → the fact is incorrect

> Ground Truth: )";

std::string_view strip_trailing_punctuation(std::string_view s) {
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
  return s;
}

std::optional<Decision> classify_token(std::string_view token) {
  const std::string t = text::to_lower(strip_trailing_punctuation(text::trim(token)));
  if (t == "1" || t == "yes" || t == "true") return Decision::Yes;
  if (t == "0" || t == "no" || t == "false") return Decision::No;
  return std::nullopt;
}

}  // namespace

std::pair<AudioRef, AudioAttachment> load_audio(std::string sample_id, const std::filesystem::path& path,
                                                double duration_s) {
  if (!(duration_s > 0.0)) throw Error("audio duration must be positive for " + sample_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read audio file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string media_type = "audio/wav";
  auto attachment = AudioAttachment::from_bytes(std::move(bytes), media_type);
  AudioRef ref{std::move(sample_id), path, duration_s, attachment.content_digest};
  return {std::move(ref), std::move(attachment)};
}

std::string build_verification_prompt(const APU& apu, std::string_view gt_context) {
  std::string prompt(kVerifyHead);
  prompt += gt_context;
  prompt += "\n\nInput:\n> Fact: ";
  prompt += apu.fact;
  return prompt;
}

Decision parse_verdict(std::string_view raw) {
  const auto body = text::trim(raw);
  if (auto whole = classify_token(body)) return *whole;
  const auto end = body.find_first_of(" \t\r\n");
  if (end != std::string_view::npos) {
    if (auto first = classify_token(body.substr(0, end))) return *first;
  }
  return Decision::FormatFailure;
}

VerificationResult verify_apus(const APUSet& apus, const AudioRef& audio, const AudioAttachment& attachment,
                               std::string_view gt_context, ModelClient& client,
                               const VerifyOptions& options) {
  if (apus.origin != Origin::Generated) throw Error("only generated units are audio-verified");
  std::vector<Verdict> verdicts(apus.units.size());

  parallel_for(apus.units.size(), options.max_inflight, [&](std::size_t i) {
    const APU& unit = apus.units[i];
    Verdict& verdict = verdicts[i];
    verdict.apu_id = unit.identifier;

    ChatRequest request;
    request.model_id = options.model_id;
    request.messages.push_back({"user", build_verification_prompt(unit, gt_context), attachment});
    RequestTag tag{Stage::Verify, audio.sample_id, apus.caption_id + "/" + unit.identifier, unit.identifier};
    try {
      const auto reply = client.complete(request, tag, [&](const std::string& raw) {
        return json{{"sample_id", audio.sample_id},
                    {"caption_id", apus.caption_id},
                    {"apu_id", unit.identifier},
                    {"audio_digest", audio.content_digest},
                    {"decision", to_string(parse_verdict(raw))}};
      });
      verdict.raw_response = reply.text;
      verdict.decision = parse_verdict(reply.text);
    } catch (const BackendError& e) {
      log::warn("verification call failed",
                {{"sample_id", audio.sample_id}, {"apu_id", unit.identifier}, {"error", e.what()}});
      verdict.raw_response = std::string("transport error: ") + e.what();
      verdict.decision = Decision::FormatFailure;
    }
  });

  return make_verification(apus.caption_id, std::move(verdicts));
}

double format_failure_rate(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) return 0.0;
  std::size_t failures = 0;
  for (const auto& v : verdicts) {
    if (v.decision == Decision::FormatFailure) ++failures;
  }
  return static_cast<double>(failures) / static_cast<double>(verdicts.size());
}

}  // namespace emosura
