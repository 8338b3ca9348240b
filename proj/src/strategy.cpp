#include "fimforge/strategy.hpp"

#include "fimforge/error.hpp"

namespace fimforge {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::expressions: return "expressions";
    case Strategy::other_statement_blocks: return "other_statement_blocks";
    case Strategy::methods: return "methods";
    case Strategy::assignment_and_declaration: return "assignment_and_declaration";
    case Strategy::parameters_and_arguments: return "parameters_and_arguments";
    case Strategy::conditionals: return "conditionals";
    case Strategy::loops: return "loops";
    case Strategy::return_statements: return "return_statements";
    case Strategy::call_expressions: return "call_expressions";
    case Strategy::class_bodies: return "class_bodies";
    case Strategy::import_statements: return "import_statements";
    case Strategy::annotations_or_decorators: return "annotations_or_decorators";
    case Strategy::go_concurrent_statements: return "go_concurrent_statements";
    case Strategy::random_intra_line: return "random_intra_line";
    case Strategy::syntax_token_trigger: return "syntax_token_trigger";
    case Strategy::parentheses_fragment: return "parentheses_fragment";
    case Strategy::post_comment_block: return "post_comment_block";
    case Strategy::random_single_line: return "random_single_line";
    case Strategy::random_multi_line: return "random_multi_line";
    case Strategy::function_body: return "function_body";
  }
  return "unknown";
}

std::string_view to_string(StrategyFamily f) {
  switch (f) {
    case StrategyFamily::ast: return "ast";
    case StrategyFamily::user: return "user";
    case StrategyFamily::random: return "random";
    case StrategyFamily::function: return "function";
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  for (auto s : kAllStrategies)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

StrategyFamily family_of(Strategy s) {
  switch (s) {
    case Strategy::random_intra_line:
    case Strategy::syntax_token_trigger:
    case Strategy::parentheses_fragment:
    case Strategy::post_comment_block:
      return StrategyFamily::user;
    case Strategy::random_single_line:
    case Strategy::random_multi_line:
      return StrategyFamily::random;
    case Strategy::function_body:
      return StrategyFamily::function;
    default:
      return StrategyFamily::ast;
  }
}

bool is_ast_strategy(Strategy s) { return family_of(s) == StrategyFamily::ast; }

StrategyWeights::StrategyWeights(std::map<Strategy, double> weights) {
  for (auto [s, w] : weights) set(s, w);
}

StrategyWeights StrategyWeights::defaults() {
  constexpr double kAstTotal = 66.89;
  constexpr double kUserSingleLines = 14.78;
  constexpr double kRandomTotal = 100.0 - 66.89 - 22.56;

  std::map<Strategy, double> w = {
      {Strategy::expressions, 10.66},
      {Strategy::other_statement_blocks, 9.90},
      {Strategy::methods, 8.90},
      {Strategy::assignment_and_declaration, 6.99},
      {Strategy::parameters_and_arguments, 6.53},
      {Strategy::conditionals, 5.43},
      {Strategy::annotations_or_decorators, 0.46},
      {Strategy::go_concurrent_statements, 0.18},
  };
  double named = 0.0;
  for (auto [s, v] : w) named += v;
  // No published share for these five; they split the residual AST mass.
  const Strategy unnamed[] = {Strategy::loops, Strategy::return_statements,
                              Strategy::call_expressions, Strategy::class_bodies,
                              Strategy::import_statements};
  for (auto s : unnamed) w[s] = (kAstTotal - named) / 5.0;

  w[Strategy::random_intra_line] = kUserSingleLines / 2.0;
  w[Strategy::syntax_token_trigger] = kUserSingleLines / 2.0;
  w[Strategy::parentheses_fragment] = 4.86;
  w[Strategy::post_comment_block] = 2.92;
  w[Strategy::random_single_line] = kRandomTotal / 2.0;
  w[Strategy::random_multi_line] = kRandomTotal / 2.0;
  w[Strategy::function_body] = 0.0;

  StrategyWeights out;
  for (auto [s, v] : w) out.set(s, v / 100.0);
  return out;
}

double StrategyWeights::weight(Strategy s) const {
  auto it = weights_.find(s);
  return it == weights_.end() ? 0.0 : it->second;
}

void StrategyWeights::set(Strategy s, double w) {
  if (!(w >= 0.0)) throw ConfigError("strategy weight must be nonnegative: " + std::string(to_string(s)));
  weights_[s] = w;
}

double StrategyWeights::total() const {
  double t = 0.0;
  for (auto [s, w] : weights_) t += w;
  return t;
}

double StrategyWeights::probability(Strategy s) const {
  double t = total();
  return t > 0.0 ? weight(s) / t : 0.0;
}

double StrategyWeights::family_probability(StrategyFamily f) const {
  double p = 0.0;
  for (auto [s, w] : weights_)
    if (family_of(s) == f) p += probability(s);
  return p;
}

Strategy draw_strategy(const StrategyWeights& weights, Rng& rng) {
  const double t = weights.total();
  if (!(t > 0.0)) throw ConfigError("all strategy weights are zero");
  const double u = rng.unit() * t;
  double cumulative = 0.0;
  std::optional<Strategy> last;
  for (auto s : kAllStrategies) {
    double w = weights.weight(s);
    if (w <= 0.0) continue;
    cumulative += w;
    last = s;
    if (u < cumulative) return s;
  }
  return *last;
}

}  // namespace fimforge
