#include "fimforge/syntax.hpp"

#include <tree_sitter/api.h>

#include <algorithm>
#include <array>
#include <memory>
#include <set>

#include "fimforge/error.hpp"

extern "C" {
const TSLanguage* tree_sitter_python();
const TSLanguage* tree_sitter_java();
const TSLanguage* tree_sitter_cpp();
const TSLanguage* tree_sitter_go();
const TSLanguage* tree_sitter_javascript();
const TSLanguage* tree_sitter_typescript();
}

namespace fimforge {

namespace {

const TSLanguage* grammar(Language language) {
  switch (language) {
    case Language::python: return tree_sitter_python();
    case Language::java: return tree_sitter_java();
    case Language::cpp: return tree_sitter_cpp();
    case Language::go: return tree_sitter_go();
    case Language::javascript: return tree_sitter_javascript();
    case Language::typescript: return tree_sitter_typescript();
  }
  throw ConfigError("no grammar for language");
}

struct ParserDeleter {
  void operator()(TSParser* p) const { ts_parser_delete(p); }
};
struct TreeDeleter {
  void operator()(TSTree* t) const { ts_tree_delete(t); }
};
struct CursorGuard {
  TSTreeCursor cursor;
  explicit CursorGuard(TSNode root) : cursor(ts_tree_cursor_new(root)) {}
  ~CursorGuard() { ts_tree_cursor_delete(&cursor); }
  CursorGuard(const CursorGuard&) = delete;
  CursorGuard& operator=(const CursorGuard&) = delete;
};

// Parsers are not thread-safe; each thread keeps one per language.
TSParser* thread_parser(Language language) {
  thread_local std::array<std::unique_ptr<TSParser, ParserDeleter>, kAllLanguages.size()> parsers;
  auto& slot = parsers[static_cast<std::size_t>(language)];
  if (!slot) {
    slot.reset(ts_parser_new());
    if (!ts_parser_set_language(slot.get(), grammar(language)))
      throw ConfigError("grammar ABI mismatch for " + std::string(to_string(language)));
  }
  return slot.get();
}

}  // namespace

SyntaxTree parse(Language language, std::string_view source) {
  if (source.size() > 0xFFFFFFF0u) throw Error("source too large to parse");
  TSParser* parser = thread_parser(language);
  std::unique_ptr<TSTree, TreeDeleter> ts_tree(
      ts_parser_parse_string(parser, nullptr, source.data(), static_cast<std::uint32_t>(source.size())));
  if (!ts_tree) throw Error("parser returned no tree");

  SyntaxTree tree;
  tree.language_ = language;
  tree.source_ = source;
  tree.line_starts_.push_back(0);
  for (std::uint32_t i = 0; i < source.size(); ++i)
    if (source[i] == '\n') tree.line_starts_.push_back(i + 1);

  TSNode root = ts_tree_root_node(ts_tree.get());
  tree.has_errors_ = ts_node_has_error(root);

  CursorGuard guard(root);
  TSTreeCursor* c = &guard.cursor;
  std::vector<NodeId> stack;
  auto& nodes = tree.nodes_;

  auto enter = [&] {
    TSNode n = ts_tree_cursor_current_node(c);
    SyntaxNode node;
    node.kind = ts_node_type(n);
    const char* field = ts_tree_cursor_current_field_name(c);
    if (field) node.field = field;
    node.span = {ts_node_start_byte(n), ts_node_end_byte(n)};
    node.named = ts_node_is_named(n);
    node.is_missing = ts_node_is_missing(n);
    node.is_error = ts_node_is_error(n);
    node.has_error = ts_node_has_error(n);
    if (!stack.empty()) {
      node.parent = stack.back();
      const auto& p = nodes[node.parent];
      node.in_error = p.in_error || p.is_error;
    }
    if (node.is_error) tree.error_regions_.push_back(node.span);
    if (node.is_missing) tree.error_regions_.push_back({node.span.start, node.span.start});
    stack.push_back(static_cast<NodeId>(nodes.size()));
    nodes.push_back(node);
  };

  enter();
  for (;;) {
    if (ts_tree_cursor_goto_first_child(c)) {
      enter();
      continue;
    }
    bool done = false;
    for (;;) {
      nodes[stack.back()].subtree_end = static_cast<NodeId>(nodes.size());
      stack.pop_back();
      if (ts_tree_cursor_goto_next_sibling(c)) {
        enter();
        break;
      }
      if (!ts_tree_cursor_goto_parent(c)) {
        done = true;
        break;
      }
    }
    if (done) break;
  }
  // The root covers the whole file, including leading and trailing trivia.
  nodes[0].span = {0, static_cast<std::uint32_t>(source.size())};
  return tree;
}

SyntaxTree parse(const SourceFile& file) { return parse(file.language, file.content); }

bool grammar_has_kind(Language language, std::string_view kind) {
  const TSLanguage* lang = grammar(language);
  return ts_language_symbol_for_name(lang, kind.data(), static_cast<std::uint32_t>(kind.size()), true) != 0;
}

std::string_view SyntaxTree::text(NodeId id) const {
  const auto& s = nodes_[id].span;
  return source_.substr(s.start, s.end - s.start);
}

std::vector<NodeId> SyntaxTree::children(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId c = id + 1; c < nodes_[id].subtree_end; c = nodes_[c].subtree_end) out.push_back(c);
  return out;
}

std::vector<NodeId> SyntaxTree::named_children(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId c = id + 1; c < nodes_[id].subtree_end; c = nodes_[c].subtree_end)
    if (nodes_[c].named) out.push_back(c);
  return out;
}

std::optional<NodeId> SyntaxTree::child_by_field(NodeId id, std::string_view field) const {
  for (NodeId c = id + 1; c < nodes_[id].subtree_end; c = nodes_[c].subtree_end)
    if (nodes_[c].field == field) return c;
  return std::nullopt;
}

std::optional<NodeId> SyntaxTree::first_child_of_kind(NodeId id, std::string_view kind) const {
  for (NodeId c = id + 1; c < nodes_[id].subtree_end; c = nodes_[c].subtree_end)
    if (nodes_[c].kind == kind) return c;
  return std::nullopt;
}

std::optional<NodeId> SyntaxTree::prev_named_sibling(NodeId id) const {
  NodeId parent = nodes_[id].parent;
  if (parent == kNoNode) return std::nullopt;
  std::optional<NodeId> prev;
  for (NodeId c = parent + 1; c < id; c = nodes_[c].subtree_end)
    if (nodes_[c].named) prev = c;
  return prev;
}

std::optional<NodeId> SyntaxTree::next_named_sibling(NodeId id) const {
  NodeId parent = nodes_[id].parent;
  if (parent == kNoNode) return std::nullopt;
  for (NodeId c = nodes_[id].subtree_end; c < nodes_[parent].subtree_end; c = nodes_[c].subtree_end)
    if (nodes_[c].named) return c;
  return std::nullopt;
}

bool SyntaxTree::touches_error(NodeId id) const {
  const auto& n = nodes_[id];
  return n.has_error || n.in_error || n.is_error;
}

std::size_t SyntaxTree::row_of(std::uint32_t offset) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  return static_cast<std::size_t>(it - line_starts_.begin()) - 1;
}

std::uint32_t SyntaxTree::line_start_of(std::uint32_t offset) const {
  return line_starts_[row_of(offset)];
}

std::optional<std::string_view> SyntaxTree::indentation_before(std::uint32_t offset) const {
  std::uint32_t ls = line_start_of(offset);
  auto ws = source_.substr(ls, offset - ls);
  for (char ch : ws)
    if (ch != ' ' && ch != '\t') return std::nullopt;
  return ws;
}

void NodeSelector::validate() const {
  std::string missing;
  for (const auto& k : kinds) {
    if (!grammar_has_kind(language, k)) {
      if (!missing.empty()) missing += ", ";
      missing += k;
    }
  }
  if (!missing.empty())
    throw ConfigError("selector " + std::string(to_string(strategy)) + " for " +
                      std::string(to_string(language)) + " names unknown node kinds: " + missing);
}

NodeSelector selector_for(Language language, Strategy strategy) {
  NodeSelector sel;
  sel.language = language;
  sel.strategy = strategy;
  for (auto k : ast_strategy_kinds(language, strategy)) sel.kinds.emplace_back(k);
  sel.validate();
  return sel;
}

std::vector<SelectedNode> select_nodes(const SyntaxTree& tree, const NodeSelector& selector, SizeBounds bounds) {
  std::vector<SelectedNode> out;
  if (selector.kinds.empty()) return out;
  std::set<std::string_view> kinds(selector.kinds.begin(), selector.kinds.end());
  const auto& nodes = tree.nodes();
  for (NodeId id = 0; id < nodes.size(); ++id) {
    const auto& n = nodes[id];
    if (!n.named || !kinds.count(n.kind)) continue;
    auto len = n.span.length();
    if (len < bounds.min_bytes || len > bounds.max_bytes) continue;
    if (tree.touches_error(id)) continue;
    // Preorder: an identical-span descendant follows its ancestor directly.
    if (!out.empty() && out.back().span == n.span) continue;
    out.push_back({id, n.span});
  }
  return out;
}

std::size_t count_identifiers(const SyntaxTree& tree) {
  const auto& kinds = identifier_kinds(tree.language());
  std::size_t count = 0;
  for (const auto& n : tree.nodes())
    if (n.named && std::find(kinds.begin(), kinds.end(), n.kind) != kinds.end()) ++count;
  return count;
}

bool is_comment_kind(Language language, std::string_view kind) {
  const auto& kinds = comment_kinds(language);
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

}  // namespace fimforge
