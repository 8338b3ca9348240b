#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fimforge/language.hpp"
#include "fimforge/source_file.hpp"
#include "fimforge/strategy.hpp"

namespace fimforge {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

/// Half-open byte range [start, end).
struct ByteSpan {
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  std::uint32_t length() const { return end - start; }
  bool contains(ByteSpan other) const { return start <= other.start && other.end <= end; }
  bool operator==(const ByteSpan&) const = default;
};

struct SyntaxNode {
  std::string_view kind;   // grammar-owned, static lifetime
  std::string_view field;  // field name under the parent, empty if none
  ByteSpan span;
  NodeId parent = kNoNode;
  NodeId subtree_end = 0;  // one past the last descendant (preorder numbering)
  bool named = false;
  bool is_error = false;    // an ERROR node
  bool is_missing = false;  // zero-width node inserted by error recovery
  bool has_error = false;   // this node or a descendant is ERROR/missing
  bool in_error = false;    // some ancestor is an ERROR node
};

/// Immutable concrete syntax tree stored as a preorder node array. Holds a
/// view of the source text, which must outlive the tree.
class SyntaxTree {
 public:
  Language language() const { return language_; }
  std::string_view source() const { return source_; }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  const SyntaxNode& node(NodeId id) const { return nodes_[id]; }
  const std::vector<SyntaxNode>& nodes() const { return nodes_; }

  std::string_view text(NodeId id) const;
  std::vector<NodeId> children(NodeId id) const;
  std::vector<NodeId> named_children(NodeId id) const;
  std::optional<NodeId> child_by_field(NodeId id, std::string_view field) const;
  std::optional<NodeId> first_child_of_kind(NodeId id, std::string_view kind) const;
  std::optional<NodeId> prev_named_sibling(NodeId id) const;
  std::optional<NodeId> next_named_sibling(NodeId id) const;

  bool has_errors() const { return has_errors_; }
  /// Spans of ERROR nodes plus positions of missing nodes.
  const std::vector<ByteSpan>& error_regions() const { return error_regions_; }
  /// True when the node lies inside an ERROR node or contains one.
  bool touches_error(NodeId id) const;

  /// Zero-based line of a byte offset.
  std::size_t row_of(std::uint32_t offset) const;
  std::uint32_t line_start_of(std::uint32_t offset) const;
  /// Whitespace between the line start and `offset`, or nullopt when other
  /// text precedes it on the line.
  std::optional<std::string_view> indentation_before(std::uint32_t offset) const;

 private:
  friend SyntaxTree parse(Language, std::string_view);

  Language language_ = Language::python;
  std::string_view source_;
  std::vector<SyntaxNode> nodes_;
  std::vector<ByteSpan> error_regions_;
  std::vector<std::uint32_t> line_starts_;
  bool has_errors_ = false;
};

/// Parses `source`; the returned tree keeps a view of it. Grammars for all
/// supported languages are linked in; a grammar ABI mismatch throws ConfigError.
SyntaxTree parse(Language language, std::string_view source);
SyntaxTree parse(const SourceFile& file);

/// True when `kind` names a node type in the language's grammar.
bool grammar_has_kind(Language language, std::string_view kind);

/// A set of grammar node kinds serving one strategy in one language.
struct NodeSelector {
  Language language = Language::python;
  Strategy strategy = Strategy::expressions;
  std::vector<std::string> kinds;

  /// Throws ConfigError naming any kind absent from the grammar.
  void validate() const;
};

/// Built-in selector for an AST strategy (kinds may be empty, e.g. Go has no
/// decorators). Validated on construction.
NodeSelector selector_for(Language language, Strategy strategy);

struct SizeBounds {
  std::uint32_t min_bytes = 1;
  std::uint32_t max_bytes = 4096;
};

struct SelectedNode {
  NodeId id = kNoNode;
  ByteSpan span;
};

/// Nodes whose kind is in the selector, whose length lies within bounds, and
/// that do not intersect an error region. Nodes with identical spans are
/// reported once (the outermost).
std::vector<SelectedNode> select_nodes(const SyntaxTree& tree, const NodeSelector& selector,
                                       SizeBounds bounds = {});

/// Count of identifier-kind nodes over a full traversal.
std::size_t count_identifiers(const SyntaxTree& tree);

/// Declaration skeleton: type headers, function signatures with bodies
/// elided, and the doc comments attached to them, in source order.
std::string extract_skeleton(const SyntaxTree& tree);

/// Full-line comments directly above `id` (no blank line between), top to bottom.
std::vector<NodeId> leading_comments(const SyntaxTree& tree, NodeId id);

/// The docstring expression statement opening a python def/class body.
std::optional<NodeId> python_docstring(const SyntaxTree& tree, NodeId definition);

/// One import/include statement as written.
struct ImportRef {
  std::string module;              // dotted name, path, or package string as written
  std::vector<std::string> names;  // imported names (python from-imports)
  bool relative = false;           // python leading dots or js "./" style
  bool system = false;             // C++ <...> include
  bool wildcard = false;
  std::string statement;           // statement text, for edge provenance
};

std::vector<ImportRef> extract_imports(const SyntaxTree& tree);

// Per-language kind tables.
const std::vector<std::string_view>& identifier_kinds(Language language);
const std::vector<std::string_view>& comment_kinds(Language language);
const std::vector<std::string_view>& function_kinds(Language language);
const std::vector<std::string_view>& bracket_container_kinds(Language language);
const std::vector<std::string_view>& ast_strategy_kinds(Language language, Strategy strategy);

/// Syntax-token triggers: an anonymous token, optionally only under certain parents.
struct TriggerToken {
  std::string_view token;
  std::vector<std::string_view> parent_kinds;  // empty: any parent
};
const std::vector<TriggerToken>& trigger_tokens(Language language);

bool is_comment_kind(Language language, std::string_view kind);

}  // namespace fimforge
