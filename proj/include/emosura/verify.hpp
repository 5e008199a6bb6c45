#pragma once

// Step 2: audio-grounded binary verification of generated units.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "emosura/backend.hpp"
#include "emosura/core.hpp"

namespace emosura {

struct AudioRef {
  std::string sample_id;
  std::filesystem::path path;
  double duration_s = 0.0;
  std::string content_digest;
};

/// Reads the file at `path`, digests its bytes, and returns both. Throws
/// Error if unreadable or if duration_s is not positive.
std::pair<AudioRef, AudioAttachment> load_audio(std::string sample_id, const std::filesystem::path& path,
                                                double duration_s);

std::string build_verification_prompt(const APU& apu, std::string_view gt_context);

/// Totalized verdict parser: 1/yes/true -> Yes, 0/no/false -> No, with a
/// first-token fallback; anything else is FormatFailure.
Decision parse_verdict(std::string_view raw);

struct VerifyOptions {
  std::string model_id{kDefaultAudioModel};
  std::size_t max_inflight = 8;
};

/// One verdict per unit, in unit order. Transport failures after retries turn
/// the unit into a FormatFailure whose raw_response names the error.
VerificationResult verify_apus(const APUSet& apus, const AudioRef& audio, const AudioAttachment& attachment,
                               std::string_view gt_context, ModelClient& client,
                               const VerifyOptions& options = {});

/// |FormatFailure| / |verdicts|, 0 for an empty list.
double format_failure_rate(const std::vector<Verdict>& verdicts);

}  // namespace emosura
