#pragma once

#include <optional>
#include <string_view>

#include <json.hpp>

namespace emosura {

/// Extracts a JSON array from a model response. The raw text is tried as-is
/// first; failing that, code-fence markers are stripped and the first
/// bracket-balanced `[...]` span is parsed. Never throws.
std::optional<nlohmann::json> extract_json_array(std::string_view raw);

/// Returns the first bracket-balanced `[...]` span of `text` (string
/// literals and escapes respected), or an empty view.
std::string_view first_balanced_array(std::string_view text);

}  // namespace emosura
