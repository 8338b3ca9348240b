#pragma once

#include <cstddef>
#include <string_view>

namespace fimforge {

/// Counts model tokens for budgeting. Real tokenizers differ per model; the
/// default counts lexical code tokens, which tracks BPE counts closely enough
/// for context budgets.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t count(std::string_view text) const = 0;
  /// Byte offset where the trailing `keep` tokens of `text` begin.
  virtual std::size_t keep_last(std::string_view text, std::size_t keep) const = 0;
  /// Byte offset just past the leading `keep` tokens of `text`.
  virtual std::size_t keep_first(std::string_view text, std::size_t keep) const = 0;
};

class LexicalTokenCounter final : public TokenCounter {
 public:
  std::size_t count(std::string_view text) const override;
  std::size_t keep_last(std::string_view text, std::size_t keep) const override;
  std::size_t keep_first(std::string_view text, std::size_t keep) const override;
};

const TokenCounter& default_token_counter();

}  // namespace fimforge
