#pragma once

// Rule-based caption metrics: BLEU-4, ROUGE-L and CIDEr-D.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "emosura/core.hpp"

namespace emosura::metrics {

struct TokenizedCaption {
  std::vector<std::string> tokens;
  std::string source;
};

/// Lowercases, splits on whitespace, and emits each punctuation character
/// as its own token. Apostrophes inside words are kept ("speaker's").
TokenizedCaption tokenize(std::string_view text);

class EmptyCandidate : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class CorpusTooSmall : public Error {
 public:
  using Error::Error;
};

struct BleuDetail {
  std::array<double, 4> precisions{};  // smoothed, n = 1..4
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  double brevity_penalty = 1.0;
  double score = 0.0;
};

/// Zero-match orders get numerator 0.1 instead of 0 (NLTK "method1").
inline constexpr double kBleuEpsilon = 0.1;

BleuDetail bleu4_detail(const TokenizedCaption& candidate, const std::vector<TokenizedCaption>& references);
double bleu4(const TokenizedCaption& candidate, const std::vector<TokenizedCaption>& references);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

inline constexpr double kRougeBeta = 1.2;

double rouge_l(const TokenizedCaption& candidate, const TokenizedCaption& reference);
/// Best F over several references.
double rouge_l(const TokenizedCaption& candidate, const std::vector<TokenizedCaption>& references);

struct CiderItem {
  TokenizedCaption candidate;
  std::vector<TokenizedCaption> references;
};

inline constexpr double kCiderSigma = 6.0;

/// One score per corpus item. Document frequencies come from the reference
/// sets; needs at least two items.
std::vector<double> cider_d(const std::vector<CiderItem>& corpus);

}  // namespace emosura::metrics
