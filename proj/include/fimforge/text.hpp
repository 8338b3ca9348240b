#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fimforge::text {

/// Byte range of one line. `end` excludes the terminating '\n' (and a '\r'
/// before it); `next` is the offset of the following line.
struct LineSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t next = 0;
};

std::vector<LineSpan> split_lines(std::string_view s);

/// Number of newline-delimited lines; a trailing newline does not start a new line.
std::size_t count_lines(std::string_view s);

bool is_space(char c);
bool is_blank(std::string_view s);
std::string_view trim(std::string_view s);
std::string_view ltrim(std::string_view s);
std::string_view rtrim(std::string_view s);
std::string strip_all_whitespace(std::string_view s);
std::string normalize_newlines(std::string_view s);

/// Right-trims every line, keeping the line structure.
std::string rtrim_lines(std::string_view s);

std::string_view first_line(std::string_view s);
/// First line containing a non-whitespace character, verbatim; empty when none.
std::string_view first_nonblank_line(std::string_view s);
std::string_view last_nonblank_line(std::string_view s);

bool is_valid_utf8(std::string_view s);
std::u32string decode_utf8(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);
std::string to_lower(std::string_view s);

/// Lexical code tokens: runs of identifier characters (ASCII alnum, '_', and
/// any non-ASCII byte) or single punctuation characters. Whitespace separates.
struct Token {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<Token> lex_code(std::string_view s);
std::vector<std::string> lex_code_strings(std::string_view s);

}  // namespace fimforge::text
