#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ereval::text {

// Unicode NFC normalization followed by leading/trailing whitespace trim.
// This is the canonical form used for exact label equality.
std::string normalize_label(std::string_view raw);

// Full Unicode case folding (NFC output).
std::string case_fold(std::string_view s);

// Whitespace-separated, case-folded tokens.
std::vector<std::string> tokens(std::string_view s);

// Splits on `sep`, dropping empty pieces.
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace ereval::text
