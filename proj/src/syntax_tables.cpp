// Grammar kind tables, pinned to the grammar versions in grammar.lock.
// Strategy tables are a reconstruction: the published composition names the
// strategy families but not the node kinds behind them.

#include <map>
#include <utility>

#include "fimforge/syntax.hpp"

namespace fimforge {

namespace {

using Kinds = std::vector<std::string_view>;

template <typename T>
const T& by_language(const std::map<Language, T>& table, Language language) {
  static const T empty{};
  auto it = table.find(language);
  return it == table.end() ? empty : it->second;
}

const Kinds kJsExpressions = {"binary_expression", "unary_expression", "ternary_expression",
                              "member_expression", "subscript_expression", "arrow_function",
                              "await_expression", "new_expression", "template_string",
                              "update_expression", "object", "array", "function_expression"};

Kinds concat(Kinds a, const Kinds& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

using StrategyTable = std::map<Strategy, Kinds>;

const std::map<Language, StrategyTable>& strategy_tables() {
  static const std::map<Language, StrategyTable> tables = {
      {Language::python,
       {
           {Strategy::expressions,
            {"binary_operator", "boolean_operator", "comparison_operator", "unary_operator",
             "not_operator", "conditional_expression", "lambda", "list_comprehension",
             "dictionary_comprehension", "set_comprehension", "generator_expression", "attribute",
             "subscript", "await"}},
           {Strategy::other_statement_blocks,
            {"block", "with_statement", "try_statement", "raise_statement", "assert_statement",
             "match_statement", "expression_statement", "delete_statement"}},
           {Strategy::methods, {"function_definition"}},
           {Strategy::assignment_and_declaration, {"assignment", "augmented_assignment", "named_expression"}},
           {Strategy::parameters_and_arguments, {"parameters", "argument_list"}},
           {Strategy::conditionals, {"if_statement", "elif_clause"}},
           {Strategy::loops, {"for_statement", "while_statement"}},
           {Strategy::return_statements, {"return_statement"}},
           {Strategy::call_expressions, {"call"}},
           {Strategy::class_bodies, {"class_definition"}},
           {Strategy::import_statements, {"import_statement", "import_from_statement", "future_import_statement"}},
           {Strategy::annotations_or_decorators, {"decorator"}},
           {Strategy::go_concurrent_statements, {}},
       }},
      {Language::java,
       {
           {Strategy::expressions,
            {"binary_expression", "unary_expression", "ternary_expression", "lambda_expression",
             "field_access", "array_access", "object_creation_expression", "cast_expression",
             "instanceof_expression", "method_reference", "update_expression", "array_creation_expression"}},
           {Strategy::other_statement_blocks,
            {"block", "try_statement", "try_with_resources_statement", "throw_statement",
             "switch_expression", "synchronized_statement", "expression_statement", "assert_statement"}},
           {Strategy::methods, {"method_declaration", "constructor_declaration"}},
           {Strategy::assignment_and_declaration,
            {"assignment_expression", "local_variable_declaration", "field_declaration"}},
           {Strategy::parameters_and_arguments, {"formal_parameters", "argument_list"}},
           {Strategy::conditionals, {"if_statement"}},
           {Strategy::loops, {"for_statement", "enhanced_for_statement", "while_statement", "do_statement"}},
           {Strategy::return_statements, {"return_statement"}},
           {Strategy::call_expressions, {"method_invocation"}},
           {Strategy::class_bodies, {"class_body", "interface_body", "enum_body"}},
           {Strategy::import_statements, {"import_declaration", "package_declaration"}},
           {Strategy::annotations_or_decorators, {"annotation", "marker_annotation"}},
           {Strategy::go_concurrent_statements, {}},
       }},
      {Language::cpp,
       {
           {Strategy::expressions,
            {"binary_expression", "unary_expression", "conditional_expression", "field_expression",
             "subscript_expression", "lambda_expression", "cast_expression", "new_expression",
             "pointer_expression", "update_expression", "sizeof_expression"}},
           {Strategy::other_statement_blocks,
            {"compound_statement", "try_statement", "throw_statement", "switch_statement",
             "expression_statement"}},
           {Strategy::methods, {"function_definition"}},
           {Strategy::assignment_and_declaration, {"assignment_expression", "declaration", "field_declaration"}},
           {Strategy::parameters_and_arguments, {"parameter_list", "argument_list"}},
           {Strategy::conditionals, {"if_statement"}},
           {Strategy::loops, {"for_statement", "for_range_loop", "while_statement", "do_statement"}},
           {Strategy::return_statements, {"return_statement"}},
           {Strategy::call_expressions, {"call_expression"}},
           {Strategy::class_bodies, {"field_declaration_list"}},
           {Strategy::import_statements, {"preproc_include", "using_declaration"}},
           {Strategy::annotations_or_decorators, {"attribute_declaration"}},
           {Strategy::go_concurrent_statements, {}},
       }},
      {Language::go,
       {
           {Strategy::expressions,
            {"binary_expression", "unary_expression", "selector_expression", "index_expression",
             "slice_expression", "type_assertion_expression", "composite_literal", "func_literal"}},
           {Strategy::other_statement_blocks,
            {"block", "defer_statement", "expression_statement", "expression_switch_statement",
             "type_switch_statement", "inc_statement", "dec_statement"}},
           {Strategy::methods, {"function_declaration", "method_declaration"}},
           {Strategy::assignment_and_declaration,
            {"assignment_statement", "short_var_declaration", "var_declaration", "const_declaration"}},
           {Strategy::parameters_and_arguments, {"parameter_list", "argument_list"}},
           {Strategy::conditionals, {"if_statement"}},
           {Strategy::loops, {"for_statement"}},
           {Strategy::return_statements, {"return_statement"}},
           {Strategy::call_expressions, {"call_expression"}},
           {Strategy::class_bodies, {"field_declaration_list", "interface_type"}},
           {Strategy::import_statements, {"import_declaration", "package_clause"}},
           {Strategy::annotations_or_decorators, {}},
           {Strategy::go_concurrent_statements,
            {"go_statement", "send_statement", "select_statement", "receive_statement"}},
       }},
      {Language::javascript,
       {
           {Strategy::expressions, kJsExpressions},
           {Strategy::other_statement_blocks,
            {"statement_block", "try_statement", "throw_statement", "switch_statement", "expression_statement"}},
           {Strategy::methods, {"function_declaration", "method_definition", "generator_function_declaration"}},
           {Strategy::assignment_and_declaration,
            {"assignment_expression", "augmented_assignment_expression", "lexical_declaration",
             "variable_declaration"}},
           {Strategy::parameters_and_arguments, {"formal_parameters", "arguments"}},
           {Strategy::conditionals, {"if_statement"}},
           {Strategy::loops, {"for_statement", "for_in_statement", "while_statement", "do_statement"}},
           {Strategy::return_statements, {"return_statement"}},
           {Strategy::call_expressions, {"call_expression"}},
           {Strategy::class_bodies, {"class_body"}},
           {Strategy::import_statements, {"import_statement"}},
           {Strategy::annotations_or_decorators, {"decorator"}},
           {Strategy::go_concurrent_statements, {}},
       }},
      {Language::typescript,
       {
           {Strategy::expressions,
            concat(kJsExpressions, {"as_expression", "non_null_expression", "satisfies_expression"})},
           {Strategy::other_statement_blocks,
            {"statement_block", "try_statement", "throw_statement", "switch_statement", "expression_statement"}},
           {Strategy::methods, {"function_declaration", "method_definition", "generator_function_declaration"}},
           {Strategy::assignment_and_declaration,
            {"assignment_expression", "augmented_assignment_expression", "lexical_declaration",
             "variable_declaration"}},
           {Strategy::parameters_and_arguments, {"formal_parameters", "arguments"}},
           {Strategy::conditionals, {"if_statement"}},
           {Strategy::loops, {"for_statement", "for_in_statement", "while_statement", "do_statement"}},
           {Strategy::return_statements, {"return_statement"}},
           {Strategy::call_expressions, {"call_expression"}},
           {Strategy::class_bodies, {"class_body", "interface_body"}},
           {Strategy::import_statements, {"import_statement"}},
           {Strategy::annotations_or_decorators, {"decorator"}},
           {Strategy::go_concurrent_statements, {}},
       }},
  };
  return tables;
}

}  // namespace

const std::vector<std::string_view>& ast_strategy_kinds(Language language, Strategy strategy) {
  static const Kinds empty;
  const auto& table = by_language(strategy_tables(), language);
  auto it = table.find(strategy);
  return it == table.end() ? empty : it->second;
}

const std::vector<std::string_view>& identifier_kinds(Language language) {
  static const std::map<Language, Kinds> table = {
      {Language::python, {"identifier"}},
      {Language::java, {"identifier", "type_identifier"}},
      {Language::cpp, {"identifier", "field_identifier", "type_identifier", "namespace_identifier"}},
      {Language::go, {"identifier", "field_identifier", "type_identifier", "package_identifier"}},
      {Language::javascript,
       {"identifier", "property_identifier", "shorthand_property_identifier",
        "shorthand_property_identifier_pattern", "private_property_identifier"}},
      {Language::typescript,
       {"identifier", "property_identifier", "shorthand_property_identifier",
        "shorthand_property_identifier_pattern", "private_property_identifier", "type_identifier"}},
  };
  return by_language(table, language);
}

const std::vector<std::string_view>& comment_kinds(Language language) {
  static const std::map<Language, Kinds> table = {
      {Language::python, {"comment"}},
      {Language::java, {"line_comment", "block_comment"}},
      {Language::cpp, {"comment"}},
      {Language::go, {"comment"}},
      {Language::javascript, {"comment"}},
      {Language::typescript, {"comment"}},
  };
  return by_language(table, language);
}

const std::vector<std::string_view>& function_kinds(Language language) {
  static const std::map<Language, Kinds> table = {
      {Language::python, {"function_definition"}},
      {Language::java, {"method_declaration", "constructor_declaration"}},
      {Language::cpp, {"function_definition"}},
      {Language::go, {"function_declaration", "method_declaration"}},
      {Language::javascript, {"function_declaration", "method_definition", "generator_function_declaration"}},
      {Language::typescript, {"function_declaration", "method_definition", "generator_function_declaration"}},
  };
  return by_language(table, language);
}

const std::vector<std::string_view>& bracket_container_kinds(Language language) {
  static const std::map<Language, Kinds> table = {
      {Language::python,
       {"argument_list", "parameters", "list", "dictionary", "set", "tuple", "parenthesized_expression",
        "list_comprehension", "dictionary_comprehension", "set_comprehension"}},
      {Language::java,
       {"argument_list", "formal_parameters", "array_initializer", "parenthesized_expression",
        "annotation_argument_list"}},
      {Language::cpp,
       {"argument_list", "parameter_list", "initializer_list", "parenthesized_expression", "condition_clause"}},
      {Language::go, {"argument_list", "parameter_list", "literal_value", "parenthesized_expression"}},
      {Language::javascript, {"arguments", "formal_parameters", "array", "object", "parenthesized_expression"}},
      {Language::typescript, {"arguments", "formal_parameters", "array", "object", "parenthesized_expression"}},
  };
  return by_language(table, language);
}

const std::vector<TriggerToken>& trigger_tokens(Language language) {
  static const std::map<Language, std::vector<TriggerToken>> table = {
      {Language::python,
       {{"=", {}}, {".", {}}, {"return", {}}, {"if", {}}, {"elif", {}}, {"for", {}}, {"while", {}},
        {"import", {}}, {"in", {}},
        {":",
         {"function_definition", "class_definition", "if_statement", "elif_clause", "else_clause",
          "for_statement", "while_statement", "with_statement", "try_statement", "except_clause",
          "finally_clause"}}}},
      {Language::java,
       {{"=", {}}, {".", {}}, {"::", {}}, {"->", {}}, {"return", {}}, {"if", {}}, {"for", {}},
        {"while", {}}, {"new", {}}}},
      {Language::cpp,
       {{"=", {}}, {".", {}}, {"->", {}}, {"::", {}}, {"return", {}}, {"if", {}}, {"for", {}},
        {"while", {}}, {"new", {}}}},
      {Language::go,
       {{"=", {}}, {":=", {}}, {".", {}}, {"return", {}}, {"if", {}}, {"for", {}}, {"go", {}},
        {"defer", {}}}},
      {Language::javascript,
       {{"=", {}}, {".", {}}, {"=>", {}}, {"return", {}}, {"if", {}}, {"for", {}}, {"while", {}},
        {"new", {}}}},
      {Language::typescript,
       {{"=", {}}, {".", {}}, {"=>", {}}, {"return", {}}, {"if", {}}, {"for", {}}, {"while", {}},
        {"new", {}}}},
  };
  return by_language(table, language);
}

}  // namespace fimforge
