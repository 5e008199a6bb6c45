#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace emosura::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
/// Case-insensitive (ASCII) substring search; npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view s, char sep);
bool is_word_char(char c);

}  // namespace emosura::text

namespace emosura::text {

struct TermHit {
  std::size_t offset = 0;
  std::size_t length = 0;
  std::size_t term_index = 0;
};

/// Finds whole-word, case-insensitive occurrences of `terms` in `haystack`,
/// scanning left to right and preferring the longest term at each position.
/// Hits never overlap.
std::vector<TermHit> scan_terms(std::string_view haystack, const std::vector<std::string>& terms);

}  // namespace emosura::text
