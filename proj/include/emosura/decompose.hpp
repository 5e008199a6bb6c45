#pragma once

// Step 1: turn a caption into atomic perceptual units through a text model.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "emosura/backend.hpp"
#include "emosura/core.hpp"

namespace emosura {

class EmptyCaption : public Error {
 public:
  using Error::Error;
};

struct DecomposeOptions {
  std::string model_id{kDefaultTextModel};
  AttributeSet allowed_attributes = base_attributes();
};

struct DecompositionRequest {
  std::string caption_id;
  std::string caption_text;
  std::string prompt;
  std::string model_id;
};

/// Renders the decomposition prompt with `caption` appended verbatim after the
/// "### Input Text" header. Throws EmptyCaption on an empty or blank caption.
std::string build_decomposition_prompt(std::string_view caption,
                                       const AttributeSet& allowed = base_attributes());

struct DroppedUnit {
  std::size_t index = 0;  // position in the response array
  std::string reason;
};

struct ParseOutcome {
  APUSet set;
  std::vector<DroppedUnit> dropped;
  std::size_t array_elements = 0;  // 0 when the response had no array
  std::size_t evidence_cleared = 0;
};

/// Total parser for decomposition responses. Accepted units get identifiers
/// g1..gN (generated) or r1..rM (reference) in array order; invalid elements
/// are dropped with a reason; evidence that is not a substring of
/// `source_caption` is cleared rather than dropped. No array at all, even
/// after fence stripping and bracket recovery, yields format_failed.
ParseOutcome parse_apu_response_detailed(std::string_view raw, std::string_view source_caption,
                                         Origin origin = Origin::Generated,
                                         const AttributeSet& allowed = base_attributes());

APUSet parse_apu_response(std::string_view raw, std::string_view source_caption,
                          Origin origin = Origin::Generated,
                          const AttributeSet& allowed = base_attributes());

/// Normalizes a schema value for an attribute; empty when not allowed.
std::string normalize_value(Attribute attribute, std::string_view value);

/// True when `fact` is one non-empty sentence (no terminator followed by
/// more text).
bool is_single_sentence(std::string_view fact);

struct CaptionRef {
  std::string sample_id;
  std::string caption_id;
  std::string text;
  Origin origin = Origin::Generated;
};

/// Build, call, parse. Propagates BackendError after retries; the raw
/// response and parsed units land in the decompose cache.
APUSet decompose_caption(const CaptionRef& caption, ModelClient& client,
                         const DecomposeOptions& options = {});

}  // namespace emosura
