#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fimforge/ingest.hpp"
#include "fimforge/rng.hpp"
#include "fimforge/sample.hpp"
#include "fimforge/strategy.hpp"
#include "fimforge/syntax.hpp"

namespace fimforge {

struct SynthesisConfig {
  SizeBounds ast_bounds{1, 4096};
  std::size_t max_middle_bytes = 4096;  // non-AST strategies
  std::size_t multi_line_min = 2;
  std::size_t multi_line_max = 8;
  /// Literal trigger strings for syntax_token mode. Empty: the grammar-level
  /// trigger table (tokens checked against the syntax tree).
  std::vector<std::string> triggers;
};

enum class IntraLineMode { random_position, syntax_token };

/// Builds a sample whose middle is content[start, end).
FimSample make_sample(const SourceFile& file, Strategy strategy, std::size_t start, std::size_t end,
                      Json meta = Json::object());

/// Uniform pick among select_nodes for the strategy's selector.
std::optional<FimSample> synthesize_ast_sample(const SyntaxTree& tree, const SourceFile& file, Strategy strategy,
                                               Rng& rng, const SynthesisConfig& config = {});

/// `tree` is required for syntax_token mode unless config.triggers is set.
std::optional<FimSample> synthesize_intra_line(const SourceFile& file, IntraLineMode mode, Rng& rng,
                                               const SyntaxTree* tree = nullptr,
                                               const SynthesisConfig& config = {});

std::optional<FimSample> synthesize_parenthesized(const SyntaxTree& tree, const SourceFile& file, Rng& rng,
                                                  const SynthesisConfig& config = {});

std::optional<FimSample> synthesize_post_comment(const SyntaxTree& tree, const SourceFile& file, Rng& rng,
                                                 const SynthesisConfig& config = {});

std::optional<FimSample> synthesize_random_lines(const SourceFile& file, bool multi, Rng& rng,
                                                 const SynthesisConfig& config = {});

/// One sample per function carrying a doc comment (python docstring or a
/// comment block directly above): middle is the body after the docstring.
std::vector<FimSample> synthesize_function_sample(const SyntaxTree& tree, const SourceFile& file);

/// Dispatches one strategy on one file.
std::optional<FimSample> synthesize_with(Strategy strategy, const SyntaxTree& tree, const SourceFile& file,
                                         Rng& rng, const SynthesisConfig& config = {});

struct CorpusSynthesisConfig {
  std::size_t budget = 1000;
  StrategyWeights weights = StrategyWeights::defaults();
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::size_t retries = 8;  // other files tried for the drawn strategy before the slot gives up
  bool function_samples = true;
  SynthesisConfig synthesis;
};

struct CorpusSynthesisStats {
  std::size_t slots = 0;
  std::size_t empty_slots = 0;
  std::size_t duplicates = 0;
  std::map<Strategy, std::size_t> per_strategy;
  std::vector<Strategy> disabled;  // positive weight, no eligible file
};

/// Draws (strategy, file) slots until `budget` distinct samples exist or the
/// corpus stops yielding new ones. Each slot has its own rng substream, so
/// output is identical for any job count. Documented-function samples, when
/// enabled, follow in path order and do not count toward the budget.
std::vector<FimSample> synthesize_corpus(const RepoIndex& index, const CorpusSynthesisConfig& config,
                                         CorpusSynthesisStats* stats = nullptr);

}  // namespace fimforge
