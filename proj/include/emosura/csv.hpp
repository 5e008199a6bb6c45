#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace emosura::csv {

using Row = std::vector<std::string>;

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

/// RFC-4180 reader: quoted fields may contain separators, doubled quotes
/// and line breaks. Accepts LF or CRLF line endings.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read(std::istream& in);

}  // namespace emosura::csv
