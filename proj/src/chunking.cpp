#include "fimforge/chunking.hpp"

#include <cctype>

#include "fimforge/text.hpp"

namespace fimforge {

std::vector<Chunk> chunk_file(const SourceFile& file) {
  const std::string_view content = file.content;
  const auto lines = text::split_lines(content);
  std::vector<Chunk> chunks;

  auto emit = [&](std::size_t first, std::size_t last) {  // 0-based inclusive line indices
    Chunk c;
    c.path = file.path;
    c.start_line = first + 1;
    c.end_line = last + 1;
    c.text = std::string(content.substr(lines[first].begin, lines[last].end - lines[first].begin));
    for (auto& term : tokenize_for_retrieval(c.text)) {
      ++c.term_frequencies[term];
      ++c.length;
    }
    chunks.push_back(std::move(c));
  };

  std::size_t i = 0;
  while (i < lines.size()) {
    auto blank = [&](std::size_t k) {
      return text::is_blank(content.substr(lines[k].begin, lines[k].end - lines[k].begin));
    };
    if (blank(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lines.size() && !blank(j)) ++j;
    // Block [i, j): split when 20 or more lines.
    for (std::size_t s = i; s < j; s += kMaxChunkLines) emit(s, std::min(j, s + kMaxChunkLines) - 1);
    i = j;
  }
  return chunks;
}

namespace {

bool is_term_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> tokenize_for_retrieval(std::string_view s) {
  std::vector<std::string> terms;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_term_byte(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_term_byte(s[j])) ++j;
    // camelCase split inside [i, j): before an upper following a lower/digit,
    // and before the last upper of an acronym followed by a lower ("HTTPServer").
    std::size_t start = i;
    for (std::size_t k = i + 1; k < j; ++k) {
      bool boundary = false;
      if (is_upper(s[k]) && !is_upper(s[k - 1])) boundary = true;
      if (is_upper(s[k]) && is_upper(s[k - 1]) && k + 1 < j && is_lower(s[k + 1])) boundary = true;
      if (boundary) {
        terms.push_back(text::to_lower(s.substr(start, k - start)));
        start = k;
      }
    }
    terms.push_back(text::to_lower(s.substr(start, j - start)));
    i = j;
  }
  return terms;
}

}  // namespace fimforge
