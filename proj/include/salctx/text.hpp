#pragma once

// UTF-8 helpers and the tokenizers shared by saliency, mock translation and
// evaluation. Character classes follow Unicode (letters and digits), so
// non-ASCII words such as "Größe" stay intact.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace salctx {

// Decodes one code point starting at s[pos] and advances pos. Invalid or
// truncated sequences decode as U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

bool is_alnum(char32_t cp);
bool is_space(char32_t cp);
bool is_combining_mark(char32_t cp);
char32_t to_lower(char32_t cp);

std::string to_lower(std::string_view s);
bool has_alnum(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Whitespace separates tokens; every character that is neither a letter,
// digit nor combining mark becomes a standalone token.
//   "U.S.-based" -> u . s . - based   (lowercase = true)
std::vector<std::string> tokenize(std::string_view text, bool lowercase);

}  // namespace salctx
