#pragma once

#include <array>
#include <map>
#include <optional>
#include <string_view>

#include "fimforge/rng.hpp"

namespace fimforge {

/// Completion-target strategies. The first thirteen select syntax-tree nodes;
/// the next four mimic editor triggers; then random line spans; then the
/// documented-function completion strategy.
enum class Strategy {
  expressions,
  other_statement_blocks,
  methods,
  assignment_and_declaration,
  parameters_and_arguments,
  conditionals,
  loops,
  return_statements,
  call_expressions,
  class_bodies,
  import_statements,
  annotations_or_decorators,
  go_concurrent_statements,
  random_intra_line,
  syntax_token_trigger,
  parentheses_fragment,
  post_comment_block,
  random_single_line,
  random_multi_line,
  function_body,
};

enum class StrategyFamily { ast, user, random, function };

inline constexpr std::array<Strategy, 20> kAllStrategies = {
    Strategy::expressions, Strategy::other_statement_blocks, Strategy::methods,
    Strategy::assignment_and_declaration, Strategy::parameters_and_arguments,
    Strategy::conditionals, Strategy::loops, Strategy::return_statements,
    Strategy::call_expressions, Strategy::class_bodies, Strategy::import_statements,
    Strategy::annotations_or_decorators, Strategy::go_concurrent_statements,
    Strategy::random_intra_line, Strategy::syntax_token_trigger,
    Strategy::parentheses_fragment, Strategy::post_comment_block,
    Strategy::random_single_line, Strategy::random_multi_line, Strategy::function_body};

std::string_view to_string(Strategy s);
std::string_view to_string(StrategyFamily f);
std::optional<Strategy> strategy_from_name(std::string_view name);
StrategyFamily family_of(Strategy s);
bool is_ast_strategy(Strategy s);

/// Nonnegative weight per strategy. Missing strategies weigh zero.
class StrategyWeights {
 public:
  StrategyWeights() = default;
  explicit StrategyWeights(std::map<Strategy, double> weights);

  /// Dataset composition by generation strategy: AST 66.89%, user-behavior
  /// 22.56% (single lines 14.78%, parentheses 4.86%, after comments 2.92%),
  /// random lines the remaining 10.55%. AST strategies without a published
  /// share split the leftover AST mass evenly; pairs sharing one published
  /// share (intra-line/syntax-token, single/multi random lines) split it evenly.
  static StrategyWeights defaults();

  double weight(Strategy s) const;
  void set(Strategy s, double w);
  double total() const;
  /// Normalized probability of `s`; zero when the total is zero.
  double probability(Strategy s) const;
  double family_probability(StrategyFamily f) const;
  const std::map<Strategy, double>& raw() const { return weights_; }

 private:
  std::map<Strategy, double> weights_;
};

/// Categorical draw proportional to the weights. Throws ConfigError when all
/// weights are zero.
Strategy draw_strategy(const StrategyWeights& weights, Rng& rng);

}  // namespace fimforge
