#include "fimforge/syntax.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

namespace {

std::string unquote(std::string_view s) {
  s = text::trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'' || s.front() == '`' || s.front() == '<'))
    return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

void python_imports(const SyntaxTree& t, std::vector<ImportRef>& out) {
  for (NodeId id = 0; id < t.size(); ++id) {
    const auto& n = t.node(id);
    if (n.kind == "import_statement") {
      for (NodeId c : t.named_children(id)) {
        if (t.node(c).field != "name") continue;
        ImportRef ref;
        ref.statement = std::string(t.text(id));
        if (t.node(c).kind == "aliased_import") {
          auto name = t.child_by_field(c, "name");
          ref.module = std::string(name ? t.text(*name) : t.text(c));
        } else {
          ref.module = std::string(t.text(c));
        }
        out.push_back(std::move(ref));
      }
    } else if (n.kind == "import_from_statement") {
      auto module = t.child_by_field(id, "module_name");
      if (!module) continue;
      ImportRef ref;
      ref.statement = std::string(t.text(id));
      ref.module = std::string(t.text(*module));
      ref.relative = t.node(*module).kind == "relative_import";
      for (NodeId c : t.named_children(id)) {
        const auto& cn = t.node(c);
        if (cn.kind == "wildcard_import") ref.wildcard = true;
        if (cn.field != "name") continue;
        if (cn.kind == "aliased_import") {
          if (auto name = t.child_by_field(c, "name")) ref.names.emplace_back(t.text(*name));
        } else {
          ref.names.emplace_back(t.text(c));
        }
      }
      out.push_back(std::move(ref));
    }
  }
}

void java_imports(const SyntaxTree& t, std::vector<ImportRef>& out) {
  for (NodeId id = 0; id < t.size(); ++id) {
    if (t.node(id).kind != "import_declaration") continue;
    ImportRef ref;
    ref.statement = std::string(t.text(id));
    bool is_static = false;
    for (NodeId c : t.children(id)) {
      const auto& k = t.node(c).kind;
      if (k == "static") is_static = true;
      if (k == "asterisk") ref.wildcard = true;
      if (k == "scoped_identifier" || k == "identifier") ref.module = std::string(t.text(c));
    }
    // `import static a.b.C.m;` refers to class a.b.C.
    if (is_static && !ref.wildcard) {
      auto dot = ref.module.rfind('.');
      if (dot != std::string::npos) ref.module.resize(dot);
    }
    if (!ref.module.empty()) out.push_back(std::move(ref));
  }
}

void cpp_imports(const SyntaxTree& t, std::vector<ImportRef>& out) {
  for (NodeId id = 0; id < t.size(); ++id) {
    if (t.node(id).kind != "preproc_include") continue;
    auto path = t.child_by_field(id, "path");
    if (!path) continue;
    ImportRef ref;
    ref.statement = std::string(text::rtrim(t.text(id)));
    ref.system = t.node(*path).kind == "system_lib_string";
    ref.module = unquote(t.text(*path));
    out.push_back(std::move(ref));
  }
}

void go_imports(const SyntaxTree& t, std::vector<ImportRef>& out) {
  for (NodeId id = 0; id < t.size(); ++id) {
    if (t.node(id).kind != "import_spec") continue;
    auto path = t.child_by_field(id, "path");
    if (!path) continue;
    ImportRef ref;
    ref.statement = std::string(t.text(id));
    ref.module = unquote(t.text(*path));
    out.push_back(std::move(ref));
  }
}

void js_imports(const SyntaxTree& t, std::vector<ImportRef>& out) {
  auto add = [&](NodeId stmt, NodeId source) {
    ImportRef ref;
    ref.statement = std::string(t.text(stmt));
    ref.module = unquote(t.text(source));
    ref.relative = text::starts_with(ref.module, "./") || text::starts_with(ref.module, "../");
    out.push_back(std::move(ref));
  };
  for (NodeId id = 0; id < t.size(); ++id) {
    const auto& n = t.node(id);
    if (n.kind == "import_statement" || n.kind == "export_statement") {
      if (auto source = t.child_by_field(id, "source")) add(id, *source);
    } else if (n.kind == "call_expression") {
      auto fn = t.child_by_field(id, "function");
      auto args = t.child_by_field(id, "arguments");
      if (!fn || !args) continue;
      auto callee = t.text(*fn);
      if (callee != "require" && callee != "import") continue;
      auto arg_nodes = t.named_children(*args);
      if (arg_nodes.size() == 1 && t.node(arg_nodes[0]).kind == "string") add(id, arg_nodes[0]);
    }
  }
}

}  // namespace

std::vector<ImportRef> extract_imports(const SyntaxTree& tree) {
  std::vector<ImportRef> out;
  switch (tree.language()) {
    case Language::python: python_imports(tree, out); break;
    case Language::java: java_imports(tree, out); break;
    case Language::cpp: cpp_imports(tree, out); break;
    case Language::go: go_imports(tree, out); break;
    case Language::javascript:
    case Language::typescript: js_imports(tree, out); break;
  }
  return out;
}

}  // namespace fimforge
