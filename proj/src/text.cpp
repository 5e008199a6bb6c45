#include "emosura/text.hpp"

#include <algorithm>
#include <cctype>

namespace emosura::text {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

std::size_t ifind(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (iequals(haystack.substr(i, needle.size()), needle)) return i;
  }
  return std::string_view::npos;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      return parts;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_' || c == '\'' || u >= 0x80;
}

}  // namespace emosura::text

namespace emosura::text {

std::vector<TermHit> scan_terms(std::string_view haystack, const std::vector<std::string>& terms) {
  std::vector<std::size_t> order(terms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return terms[a].size() > terms[b].size(); });

  std::vector<TermHit> hits;
  std::size_t pos = 0;
  while (pos < haystack.size()) {
    const bool at_boundary = pos == 0 || !is_word_char(haystack[pos - 1]);
    bool matched = false;
    if (at_boundary && is_word_char(haystack[pos])) {
      for (const std::size_t t : order) {
        const auto& term = terms[t];
        if (term.empty() || pos + term.size() > haystack.size()) continue;
        if (!iequals(haystack.substr(pos, term.size()), term)) continue;
        const std::size_t end = pos + term.size();
        if (end < haystack.size() && is_word_char(haystack[end]) && is_word_char(term.back())) continue;
        hits.push_back({pos, term.size(), t});
        pos = end;
        matched = true;
        break;
      }
    }
    if (!matched) ++pos;
  }
  return hits;
}

}  // namespace emosura::text
