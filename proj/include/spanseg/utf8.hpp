#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace spanseg::utf8 {

// Returns nullopt on malformed input (bad lead byte, truncated sequence,
// overlong encoding, surrogate, or code point above U+10FFFF).
std::optional<std::u32string> decode(std::string_view bytes);

std::string encode(std::u32string_view text);
std::string encode(char32_t c);

// ASCII whitespace only; these are the corpus token separators.
bool is_space(char32_t c);

}  // namespace spanseg::utf8
