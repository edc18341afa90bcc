#pragma once

// Minimal RFC 4180 field handling for the manifest, feature and report CSVs.

#include <string>
#include <string_view>
#include <vector>

namespace patchaudit::csv {

/// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Splits one line. Throws std::invalid_argument on an unterminated quote.
std::vector<std::string> split(std::string_view line);

/// 17 significant digits (%.17g); parses back to the same double.
std::string format_double(double value);

/// Strict parse of a full field; throws std::invalid_argument on junk.
double parse_double(std::string_view text);

}  // namespace patchaudit::csv
