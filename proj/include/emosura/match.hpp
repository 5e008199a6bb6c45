#pragma once

// Step 3: align generated units with reference units and score.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "emosura/backend.hpp"
#include "emosura/core.hpp"

namespace emosura {

std::string build_matching_prompt(const APUSet& generated, const APUSet& reference);

struct ParsedMatches {
  std::vector<MatchPair> pairs;  // one per generated id, in generated order
  bool match_format_failed = false;
  std::size_t dropped_entries = 0;
  std::size_t coerced_ids = 0;
};

/// Totalized parser for matching responses. `generated` supplies ids (and
/// facts, for entries that omit the optional identifier); `oracle_ids` is the
/// set of valid reference ids.
ParsedMatches parse_match_response(std::string_view raw, const APUSet& generated,
                                   const std::set<std::string>& oracle_ids);

/// Q = distinct matched reference ids; extra = verified ids whose match is none.
MatchResult compute_match_sets(const std::vector<MatchPair>& pairs, const VerificationResult& verification,
                               const APUSet& reference);

/// Counts for one scope. With `filter`, every population is restricted to
/// units whose attribute is in the set.
ScoreCounts count_sets(const APUSet& generated, const APUSet& reference,
                       const VerificationResult& verification, const MatchResult& match,
                       const AttributeSet* filter = nullptr);

struct MatchOptions {
  std::string model_id{kDefaultTextModel};
  AttributeSet descriptive_attributes = default_descriptive_attributes();
};

/// One backend call per caption pair; empty sets skip the call.
ParsedMatches match_units(const APUSet& generated, const APUSet& reference, ModelClient& client,
                          const std::string& sample_id, const MatchOptions& options = {});

struct MatchAndScore {
  MatchResult match;
  ScoreCounts all_counts;
  ScoreCounts descriptive_counts;
  EmoSuraScore score;
};

/// Scores already-matched sets (no backend involved).
MatchAndScore score_matched(const APUSet& generated, const APUSet& reference,
                            const VerificationResult& verification, const ParsedMatches& parsed,
                            const AttributeSet& descriptive_attributes);

MatchAndScore match_and_score(const APUSet& generated, const APUSet& reference,
                              const VerificationResult& verification, ModelClient& client,
                              const std::string& sample_id, const MatchOptions& options = {});

}  // namespace emosura
