#pragma once

// Lexicon-driven caption sabotage for detection tests.
//
//   A  emotion polarity flip
//   B  gender swap with matching pitch / texture descriptors
//   C  speech verbs replaced by stylized vocal events
//   D  all of the above plus volume and rate descriptors

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emosura/core.hpp"

namespace emosura::bench {

enum class PerturbationType { A, B, C, D };

std::string_view to_string(PerturbationType type);
std::optional<PerturbationType> parse_perturbation_type(std::string_view text);
std::vector<PerturbationType> parse_perturbation_types(std::string_view csv);

struct SubstitutionRule {
  std::string match;
  std::string replacement;
  Attribute attribute = Attribute::Emotion;
};

/// Rules grouped by lexicon file; each file is `match\treplacement\tattribute`.
struct PerturbLexicon {
  std::vector<SubstitutionRule> emotion;
  std::vector<SubstitutionRule> gender;
  std::vector<SubstitutionRule> event;
  std::vector<SubstitutionRule> acoustic;

  static std::vector<SubstitutionRule> parse_tsv(std::string_view tsv);
  /// Loads emotion.tsv, gender.tsv, event.tsv and acoustic.tsv from `dir`.
  static PerturbLexicon load(const std::filesystem::path& dir);

  /// Rules applied by one perturbation type, in priority order.
  std::vector<SubstitutionRule> rules_for(PerturbationType type) const;
};

/// Attribute categories a type may touch. Empty for D (unrestricted).
AttributeSet target_attributes(PerturbationType type);

struct Substitution {
  std::size_t original_offset = 0;
  std::string original;
  std::size_t new_offset = 0;
  std::string replacement;
  Attribute attribute = Attribute::Emotion;
};

struct PerturbationSpec {
  PerturbationType type = PerturbationType::A;
  std::vector<Substitution> substitutions;  // in caption order
  AttributeSet target_attributes;
};

json to_json(const PerturbationSpec& spec);
PerturbationSpec perturbation_from_json(const json& j);

class NoSubstitutableSpan : public Error {
 public:
  using Error::Error;
};

struct AuditIssue {
  std::size_t substitution = 0;  // index into spec.substitutions
  std::string reason;
};

struct PerturbationResult {
  std::string caption;
  PerturbationSpec spec;
  std::vector<AuditIssue> audit;  // empty when no APUs were supplied or all spans pass
};

/// Case of the matched text carries over to the replacement (Capitalized,
/// UPPER). Type B requires at least one gender span.
PerturbationResult perturb(std::string_view caption, const PerturbLexicon& lexicon, PerturbationType type,
                           const APUSet* apus = nullptr);

/// Checks that every substituted span only overlaps APU evidence whose
/// attribute lies in the type's target categories.
std::vector<AuditIssue> audit_substitutions(std::string_view original, const PerturbationSpec& spec,
                                            const APUSet& apus);

/// Applies the recorded substitutions in reverse. Throws Error if the
/// perturbed text does not carry the recorded replacements.
std::string invert_perturbation(std::string_view perturbed, const PerturbationSpec& spec);

}  // namespace emosura::bench
