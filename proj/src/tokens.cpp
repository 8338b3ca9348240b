#include "fimforge/tokens.hpp"

#include "fimforge/text.hpp"

namespace fimforge {

std::size_t LexicalTokenCounter::count(std::string_view text) const {
  return text::lex_code(text).size();
}

std::size_t LexicalTokenCounter::keep_last(std::string_view text, std::size_t keep) const {
  auto tokens = text::lex_code(text);
  if (keep >= tokens.size()) return 0;
  if (keep == 0) return text.size();
  return tokens[tokens.size() - keep].begin;
}

std::size_t LexicalTokenCounter::keep_first(std::string_view text, std::size_t keep) const {
  auto tokens = text::lex_code(text);
  if (keep >= tokens.size()) return text.size();
  if (keep == 0) return 0;
  return tokens[keep - 1].end;
}

const TokenCounter& default_token_counter() {
  static const LexicalTokenCounter counter;
  return counter;
}

}  // namespace fimforge
