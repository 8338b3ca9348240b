#include <algorithm>

#include "fimforge/syntax.hpp"

namespace fimforge {

std::vector<NodeId> leading_comments(const SyntaxTree& t, NodeId id) {
  const auto src = t.source();
  std::vector<NodeId> comments;
  NodeId cur = id;
  for (auto prev = t.prev_named_sibling(cur); prev; prev = t.prev_named_sibling(cur)) {
    const auto& p = t.node(*prev);
    if (!is_comment_kind(t.language(), p.kind)) break;
    if (!t.indentation_before(p.span.start)) break;
    std::uint32_t end = p.span.end;
    while (end > p.span.start && (src[end - 1] == '\n' || src[end - 1] == '\r')) --end;
    if (t.row_of(end) + 1 < t.row_of(t.node(cur).span.start)) break;
    comments.push_back(*prev);
    cur = *prev;
  }
  std::reverse(comments.begin(), comments.end());
  return comments;
}

std::optional<NodeId> python_docstring(const SyntaxTree& t, NodeId definition) {
  auto body = t.child_by_field(definition, "body");
  if (!body) return std::nullopt;
  for (NodeId s : t.named_children(*body)) {
    if (t.node(s).kind == "comment") continue;
    auto inner = t.named_children(s);
    if (t.node(s).kind == "expression_statement" && inner.size() == 1 && t.node(inner[0]).kind == "string")
      return s;
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace fimforge
