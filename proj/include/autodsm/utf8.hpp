#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace autodsm::utf8 {

// Byte offset of every scalar value in `text`, plus a final entry equal to
// text.size(). Throws ParseError with the offending byte offset when `text`
// is not well-formed UTF-8.
std::vector<std::size_t> scalar_offsets(std::string_view text);

// Number of Unicode scalar values in a well-formed UTF-8 string.
std::size_t length(std::string_view text);

// Decode to UTF-32. Throws ParseError on malformed input.
std::u32string decode(std::string_view text);

void append(std::string& out, char32_t cp);

std::string encode(std::u32string_view text);

}  // namespace autodsm::utf8
