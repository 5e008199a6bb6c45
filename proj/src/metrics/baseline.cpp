#include "emosura/metrics/baseline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace emosura::metrics {

namespace {

using NGram = std::vector<std::string>;
using NGramCounts = std::map<NGram, std::size_t>;

NGramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NGramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || static_cast<unsigned char>(c) >= 0x80;
}

}  // namespace

TokenizedCaption tokenize(std::string_view text) {
  TokenizedCaption out;
  out.source = std::string(text);
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) out.tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_space(c)) {
      flush();
    } else if (c == '\'' && !current.empty() && i + 1 < text.size() && is_alnum(text[i + 1])) {
      current.push_back(c);
    } else if (is_punct(c)) {
      flush();
      out.tokens.emplace_back(1, c);
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return out;
}

BleuDetail bleu4_detail(const TokenizedCaption& candidate, const std::vector<TokenizedCaption>& references) {
  if (candidate.tokens.empty()) throw EmptyCandidate("BLEU candidate has no tokens");
  if (references.empty()) throw EmptyInput("BLEU needs at least one reference");

  BleuDetail d;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = count_ngrams(candidate.tokens, n);
    NGramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : count_ngrams(ref.tokens, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    std::size_t matched = 0, total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      if (const auto it = max_ref.find(gram); it != max_ref.end()) matched += std::min(count, it->second);
    }
    d.matches[n - 1] = matched;
    d.totals[n - 1] = total;
    const double denom = total == 0 ? 1.0 : static_cast<double>(total);
    const double p = matched == 0 ? kBleuEpsilon / denom : static_cast<double>(matched) / denom;
    d.precisions[n - 1] = p;
    log_sum += std::log(p);
  }

  // Closest reference length; ties go to the shorter one.
  const auto c = candidate.tokens.size();
  std::size_t r = references.front().tokens.size();
  for (const auto& ref : references) {
    const auto len = ref.tokens.size();
    const auto diff = [&](std::size_t x) { return x > c ? x - c : c - x; };
    if (diff(len) < diff(r) || (diff(len) == diff(r) && len < r)) r = len;
  }
  d.brevity_penalty = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  d.score = d.brevity_penalty * std::exp(log_sum / 4.0);
  return d;
}

double bleu4(const TokenizedCaption& candidate, const std::vector<TokenizedCaption>& references) {
  return bleu4_detail(candidate, references).score;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenizedCaption& candidate, const TokenizedCaption& reference) {
  if (candidate.tokens.empty() || reference.tokens.empty()) throw EmptyInput("ROUGE-L needs non-empty inputs");
  const auto l = lcs_length(candidate.tokens, reference.tokens);
  if (l == 0) return 0.0;
  const double p = static_cast<double>(l) / static_cast<double>(candidate.tokens.size());
  const double r = static_cast<double>(l) / static_cast<double>(reference.tokens.size());
  const double b2 = kRougeBeta * kRougeBeta;
  return ((1.0 + b2) * p * r) / (r + b2 * p);
}

double rouge_l(const TokenizedCaption& candidate, const std::vector<TokenizedCaption>& references) {
  if (references.empty()) throw EmptyInput("ROUGE-L needs at least one reference");
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, rouge_l(candidate, ref));
  return best;
}

namespace {

struct TfIdf {
  std::array<std::map<NGram, double>, 4> vec;
  std::array<double, 4> norm{};
  std::size_t length = 0;
};

TfIdf weigh(const std::vector<std::string>& tokens, const std::map<NGram, std::size_t>& df, double log_n) {
  TfIdf out;
  out.length = tokens.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    double sq = 0.0;
    for (const auto& [gram, tf] : count_ngrams(tokens, n)) {
      const auto it = df.find(gram);
      const double d = it == df.end() ? 1.0 : static_cast<double>(std::max<std::size_t>(1, it->second));
      const double w = static_cast<double>(tf) * (log_n - std::log(d));
      out.vec[n - 1][gram] = w;
      sq += w * w;
    }
    out.norm[n - 1] = std::sqrt(sq);
  }
  return out;
}

double cider_pair(const TfIdf& hyp, const TfIdf& ref) {
  const double delta = static_cast<double>(hyp.length) - static_cast<double>(ref.length);
  const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
  double total = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    double dot = 0.0;
    for (const auto& [gram, w] : hyp.vec[n]) {
      if (const auto it = ref.vec[n].find(gram); it != ref.vec[n].end()) dot += std::min(w, it->second) * it->second;
    }
    if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) dot /= hyp.norm[n] * ref.norm[n];
    total += dot * penalty;
  }
  return total / 4.0;
}

}  // namespace

std::vector<double> cider_d(const std::vector<CiderItem>& corpus) {
  if (corpus.size() < 2) throw CorpusTooSmall("CIDEr-D needs at least two items");
  std::map<NGram, std::size_t> df;
  for (const auto& item : corpus) {
    std::set<NGram> seen;
    for (const auto& ref : item.references) {
      for (std::size_t n = 1; n <= 4; ++n) {
        for (const auto& entry : count_ngrams(ref.tokens, n)) seen.insert(entry.first);
      }
    }
    for (const auto& gram : seen) ++df[gram];
  }
  const double log_n = std::log(static_cast<double>(corpus.size()));

  std::vector<double> scores;
  scores.reserve(corpus.size());
  for (const auto& item : corpus) {
    if (item.candidate.tokens.empty()) throw EmptyCandidate("CIDEr-D candidate has no tokens");
    if (item.references.empty()) throw EmptyInput("CIDEr-D item without references");
    const auto hyp = weigh(item.candidate.tokens, df, log_n);
    double sum = 0.0;
    for (const auto& ref : item.references) sum += cider_pair(hyp, weigh(ref.tokens, df, log_n));
    scores.push_back(10.0 * sum / static_cast<double>(item.references.size()));
  }
  return scores;
}

}  // namespace emosura::metrics
