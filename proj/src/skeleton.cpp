#include <algorithm>
#include <initializer_list>

#include "fimforge/syntax.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

namespace {

constexpr std::string_view kBraceElision = " { /* ... */ }";
constexpr std::string_view kPythonElision = "...";

bool is_one_of(std::string_view kind, std::initializer_list<std::string_view> kinds) {
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

class SkeletonWriter {
 public:
  explicit SkeletonWriter(const SyntaxTree& tree) : t_(tree), src_(tree.source()) {}

  std::string run() {
    if (t_.language() == Language::python)
      python_container(t_.root(), "");
    else
      brace_container(t_.root(), "", /*in_class=*/false);
    return std::move(out_);
  }

 private:
  const SyntaxTree& t_;
  std::string_view src_;
  std::string out_;

  std::string_view slice(std::uint32_t a, std::uint32_t b) const { return src_.substr(a, b - a); }

  std::string indent_of(NodeId id, std::string_view fallback) const {
    auto ws = t_.indentation_before(t_.node(id).span.start);
    return std::string(ws ? *ws : fallback);
  }

  bool usable(NodeId id) const { return !t_.touches_error(id); }

  void leading_comments(NodeId id) {
    for (NodeId c : fimforge::leading_comments(t_, id)) {
      out_ += indent_of(c, "");
      out_ += text::rtrim(t_.text(c));
      out_ += '\n';
    }
  }

  // ---- python ----

  void python_container(NodeId container, std::string_view fallback_indent) {
    for (NodeId child : t_.named_children(container)) python_item(child, fallback_indent);
  }

  bool python_item(NodeId id, std::string_view fallback_indent) {
    const auto& n = t_.node(id);
    if (!usable(id)) return false;
    if (n.kind == "decorated_definition") {
      auto def = t_.child_by_field(id, "definition");
      if (!def) return false;
      std::string indent = indent_of(id, fallback_indent);
      leading_comments(id);
      for (NodeId c : t_.named_children(id)) {
        if (t_.node(c).kind != "decorator") continue;
        out_ += indent;
        out_ += text::rtrim(t_.text(c));
        out_ += '\n';
      }
      python_definition(*def, indent);
      return true;
    }
    if (n.kind == "class_definition" || n.kind == "function_definition") {
      std::string indent = indent_of(id, fallback_indent);
      leading_comments(id);
      python_definition(id, indent);
      return true;
    }
    return false;
  }

  void python_definition(NodeId id, const std::string& indent) {
    auto body = t_.child_by_field(id, "body");
    const auto& n = t_.node(id);
    if (!body) return;
    out_ += indent;
    out_ += text::rtrim(slice(n.span.start, t_.node(*body).span.start));
    out_ += '\n';

    std::string body_indent = indent + "    ";
    if (t_.row_of(t_.node(*body).span.start) != t_.row_of(n.span.start)) {
      if (auto ws = t_.indentation_before(t_.node(*body).span.start)) body_indent = std::string(*ws);
    }

    auto stmts = t_.named_children(*body);
    if (auto doc = python_docstring(t_, id)) {
      out_ += body_indent;
      out_ += text::rtrim(t_.text(*doc));
      out_ += '\n';
    }

    bool emitted_member = false;
    if (n.kind == "class_definition") {
      for (NodeId s : stmts) emitted_member |= python_item(s, body_indent);
    }
    if (!emitted_member) {
      out_ += body_indent;
      out_ += kPythonElision;
      out_ += '\n';
    }
  }

  // ---- brace languages ----

  bool is_type_decl(std::string_view kind) const {
    switch (t_.language()) {
      case Language::java:
        return is_one_of(kind, {"class_declaration", "interface_declaration", "enum_declaration",
                                "record_declaration", "annotation_type_declaration"});
      case Language::cpp:
        return is_one_of(kind, {"class_specifier", "struct_specifier", "union_specifier"});
      case Language::javascript:
        return kind == "class_declaration";
      case Language::typescript:
        return is_one_of(kind, {"class_declaration", "abstract_class_declaration"});
      default:
        return false;
    }
  }

  bool is_function(std::string_view kind) const {
    switch (t_.language()) {
      case Language::java: return is_one_of(kind, {"method_declaration", "constructor_declaration",
                                                   "compact_constructor_declaration"});
      case Language::cpp: return kind == "function_definition";
      case Language::go: return is_one_of(kind, {"function_declaration", "method_declaration"});
      case Language::javascript:
      case Language::typescript:
        return is_one_of(kind, {"function_declaration", "generator_function_declaration", "method_definition"});
      default: return false;
    }
  }

  bool is_verbatim_decl(NodeId id) const {
    const auto& kind = t_.node(id).kind;
    switch (t_.language()) {
      case Language::go: return kind == "type_declaration";
      case Language::typescript:
        return is_one_of(kind, {"interface_declaration", "type_alias_declaration", "enum_declaration",
                                "method_signature", "abstract_method_signature"});
      case Language::cpp:
        return (kind == "field_declaration" || kind == "declaration") && declares_function(id);
      default: return false;
    }
  }

  bool declares_function(NodeId id) const {
    for (NodeId d = id + 1; d < t_.node(id).subtree_end; ++d) {
      const auto& k = t_.node(d).kind;
      if (k == "function_declarator") return true;
      if (k == "compound_statement" || k == "field_declaration_list" || k == "lambda_expression") return false;
    }
    return false;
  }

  void brace_container(NodeId container, std::string_view fallback_indent, bool in_class) {
    for (NodeId child : t_.named_children(container)) brace_item(child, fallback_indent, in_class);
  }

  bool brace_item(NodeId id, std::string_view fallback_indent, bool in_class) {
    if (!usable(id)) return false;
    const auto& n = t_.node(id);
    const auto lang = t_.language();
    std::string indent = indent_of(id, fallback_indent);

    // Wrappers whose header text belongs to the wrapped declaration.
    if (lang == Language::cpp && n.kind == "template_declaration") {
      for (NodeId c : t_.named_children(id)) {
        const auto& k = t_.node(c).kind;
        if (is_type_decl(k) || is_function(k) || is_verbatim_decl(c)) {
          leading_comments(id);
          return brace_declaration(c, n.span.start, indent);
        }
      }
      return false;
    }
    if ((lang == Language::javascript || lang == Language::typescript) && n.kind == "export_statement") {
      auto decl = t_.child_by_field(id, "declaration");
      if (!decl || !declaration_worth_emitting(*decl)) return false;
      leading_comments(id);
      return brace_declaration(*decl, n.span.start, indent);
    }
    if (lang == Language::cpp && n.kind == "namespace_definition") {
      auto body = t_.child_by_field(id, "body");
      if (!body) return false;
      leading_comments(id);
      out_ += indent;
      out_ += text::rtrim(slice(n.span.start, t_.node(*body).span.start));
      out_ += " {\n";
      brace_container(*body, indent, false);
      out_ += indent;
      out_ += "}\n";
      return true;
    }
    if (lang == Language::cpp && in_class && n.kind == "access_specifier") {
      out_ += indent;
      out_ += t_.text(id);
      out_ += ":\n";
      return true;
    }
    if (!declaration_worth_emitting(id)) return false;
    leading_comments(id);
    return brace_declaration(id, n.span.start, indent);
  }

  bool declaration_worth_emitting(NodeId id) const {
    const auto& k = t_.node(id).kind;
    return is_type_decl(k) || is_function(k) || is_verbatim_decl(id) || arrow_binding(id).has_value();
  }

  // `const f = (...) => { ... }` at statement level: returns the function body.
  std::optional<NodeId> arrow_binding(NodeId id) const {
    const auto lang = t_.language();
    if (lang != Language::javascript && lang != Language::typescript) return std::nullopt;
    if (t_.node(id).kind != "lexical_declaration") return std::nullopt;
    auto declarators = t_.named_children(id);
    if (declarators.size() != 1 || t_.node(declarators[0]).kind != "variable_declarator") return std::nullopt;
    auto value = t_.child_by_field(declarators[0], "value");
    if (!value) return std::nullopt;
    const auto& vk = t_.node(*value).kind;
    if (vk != "arrow_function" && vk != "function_expression") return std::nullopt;
    auto body = t_.child_by_field(*value, "body");
    if (!body || t_.node(*body).kind != "statement_block") return std::nullopt;
    return body;
  }

  bool brace_declaration(NodeId id, std::uint32_t start, const std::string& indent) {
    const auto& n = t_.node(id);
    if (is_verbatim_decl(id)) {
      out_ += indent;
      out_ += text::rtrim(slice(start, n.span.end));
      if (t_.language() == Language::typescript && (n.kind == "method_signature" || n.kind == "abstract_method_signature"))
        if (out_.back() != ';') out_ += ';';
      out_ += '\n';
      return true;
    }
    if (auto body = arrow_binding(id)) {
      out_ += indent;
      out_ += text::rtrim(slice(start, t_.node(*body).span.start));
      out_ += kBraceElision;
      if (text::rtrim(t_.text(id)).ends_with(";")) out_ += ';';
      out_ += '\n';
      return true;
    }
    if (is_function(n.kind)) {
      auto body = t_.child_by_field(id, "body");
      if (!body) {
        out_ += indent;
        out_ += text::rtrim(slice(start, n.span.end));
        out_ += '\n';
        return true;
      }
      std::uint32_t sig_end = t_.node(*body).span.start;
      if (auto init = t_.first_child_of_kind(id, "field_initializer_list")) sig_end = t_.node(*init).span.start;
      out_ += indent;
      out_ += text::rtrim(slice(start, sig_end));
      out_ += kBraceElision;
      out_ += '\n';
      return true;
    }
    if (is_type_decl(n.kind)) {
      auto body = t_.child_by_field(id, "body");
      if (!body) return false;
      out_ += indent;
      out_ += text::rtrim(slice(start, t_.node(*body).span.start));
      out_ += " {\n";
      std::string member_fallback = indent + "    ";
      if (n.kind == "enum_declaration") java_enum_constants(*body, member_fallback);
      for (NodeId member : t_.named_children(*body)) {
        if (t_.node(member).kind == "enum_body_declarations")
          brace_container(member, member_fallback, true);
        else
          brace_item(member, member_fallback, true);
      }
      out_ += indent;
      out_ += t_.language() == Language::cpp ? "};\n" : "}\n";
      return true;
    }
    return false;
  }

  void java_enum_constants(NodeId body, const std::string& fallback) {
    std::string line;
    std::optional<NodeId> first;
    for (NodeId c : t_.named_children(body)) {
      if (t_.node(c).kind != "enum_constant") continue;
      if (!first) first = c;
      if (!line.empty()) line += ", ";
      line += t_.text(c);
    }
    if (!first) return;
    out_ += indent_of(*first, fallback);
    out_ += line;
    out_ += ";\n";
  }
};

}  // namespace

std::string extract_skeleton(const SyntaxTree& tree) { return SkeletonWriter(tree).run(); }

}  // namespace fimforge
