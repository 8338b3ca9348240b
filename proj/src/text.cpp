#include "fimforge/text.hpp"

#include <algorithm>
#include <cctype>

namespace fimforge::text {

std::vector<LineSpan> split_lines(std::string_view s) {
  std::vector<LineSpan> lines;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t nl = s.find('\n', pos);
    LineSpan line;
    line.begin = pos;
    if (nl == std::string_view::npos) {
      line.end = s.size();
      line.next = s.size();
    } else {
      line.end = nl;
      line.next = nl + 1;
    }
    if (line.end > line.begin && s[line.end - 1] == '\r') --line.end;
    lines.push_back(line);
    pos = line.next;
  }
  return lines;
}

std::size_t count_lines(std::string_view s) {
  if (s.empty()) return 0;
  std::size_t n = static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
  return s.back() == '\n' ? n : n + 1;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), is_space);
}

std::string_view ltrim(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return s.substr(i);
}

std::string_view rtrim(std::string_view s) {
  std::size_t n = s.size();
  while (n > 0 && is_space(s[n - 1])) --n;
  return s.substr(0, n);
}

std::string_view trim(std::string_view s) { return rtrim(ltrim(s)); }

std::string strip_all_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (!is_space(c)) out.push_back(c);
  return out;
}

std::string normalize_newlines(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::string rtrim_lines(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  auto lines = split_lines(s);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += rtrim(s.substr(lines[i].begin, lines[i].end - lines[i].begin));
    if (lines[i].next > lines[i].end) out.push_back('\n');
  }
  return out;
}

std::string_view first_line(std::string_view s) {
  auto nl = s.find('\n');
  auto line = nl == std::string_view::npos ? s : s.substr(0, nl);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string_view first_nonblank_line(std::string_view s) {
  for (const auto& l : split_lines(s)) {
    auto line = s.substr(l.begin, l.end - l.begin);
    if (!is_blank(line)) return line;
  }
  return {};
}

std::string_view last_nonblank_line(std::string_view s) {
  auto lines = split_lines(s);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto line = s.substr(it->begin, it->end - it->begin);
    if (!is_blank(line)) return line;
  }
  return {};
}

namespace {

// Returns the sequence length for a lead byte, 0 when invalid.
int utf8_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 0;
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    int len = utf8_length(c);
    if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) return false;
    char32_t cp = len == 1 ? c : c & (0x7F >> len);
    for (int k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates, out of range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += static_cast<std::size_t>(len);
  }
  return true;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    int len = utf8_length(c);
    if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0x7F >> len);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

}  // namespace

std::vector<Token> lex_code(std::string_view s) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
    } else if (is_word_byte(s[i])) {
      std::size_t j = i;
      while (j < s.size() && is_word_byte(s[j])) ++j;
      tokens.push_back({i, j});
      i = j;
    } else {
      tokens.push_back({i, i + 1});
      ++i;
    }
  }
  return tokens;
}

std::vector<std::string> lex_code_strings(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : lex_code(s)) out.emplace_back(s.substr(t.begin, t.end - t.begin));
  return out;
}

}  // namespace fimforge::text
