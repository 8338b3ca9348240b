#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <set>

#include "fimforge/ingest.hpp"
#include "fimforge/syntax.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

namespace {

std::string dirname(std::string_view path) {
  auto slash = path.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(path.substr(0, slash));
}

// Joins and collapses "." and ".."; nullopt when the path climbs above the root.
std::optional<std::string> normalize(std::string_view dir, std::string_view rel) {
  std::vector<std::string> parts;
  auto push = [&](std::string_view s) -> bool {
    std::size_t i = 0;
    while (i <= s.size()) {
      auto j = s.find('/', i);
      if (j == std::string_view::npos) j = s.size();
      auto part = s.substr(i, j - i);
      if (part == "..") {
        if (parts.empty()) return false;
        parts.pop_back();
      } else if (!part.empty() && part != ".") {
        parts.emplace_back(part);
      }
      i = j + 1;
    }
    return true;
  };
  if (!push(dir) || !push(rel)) return std::nullopt;
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

std::string join(std::string_view dir, std::string_view rel) {
  if (dir.empty()) return std::string(rel);
  return std::string(dir) + "/" + std::string(rel);
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash > start) out.emplace_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return out;
}

bool ends_with_path(std::string_view path, std::string_view tail) {
  if (path == tail) return true;
  return path.size() > tail.size() && path.substr(path.size() - tail.size()) == tail &&
         path[path.size() - tail.size() - 1] == '/';
}

std::string dots_to_slashes(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '.', '/');
  return out;
}

class Resolver {
 public:
  explicit Resolver(const RepoIndex& index) {
    for (const auto& f : index.files) {
      paths_.insert(f.path);
      if (f.language == Language::go && !text::starts_with(std::string_view(f.path).substr(f.path.rfind('/') + 1), "_") &&
          !(f.path.size() > 8 && f.path.substr(f.path.size() - 8) == "_test.go"))
        go_dirs_[dirname(f.path)].push_back(f.path);
      if (f.language == Language::java) java_dirs_[dirname(f.path)].push_back(f.path);
    }
  }

  std::vector<std::string> resolve(const SourceFile& file, const ImportRef& ref) const {
    switch (file.language) {
      case Language::python: return python(file.path, ref);
      case Language::java: return java(ref);
      case Language::cpp: return cpp(file.path, ref);
      case Language::go: return go(ref);
      case Language::javascript:
      case Language::typescript: return js(file.path, ref);
    }
    return {};
  }

 private:
  bool has(const std::string& p) const { return paths_.count(p) != 0; }

  std::vector<std::string> python(const std::string& importer, const ImportRef& ref) const {
    std::vector<std::string> roots;
    std::string module = ref.module;
    if (ref.relative) {
      std::size_t dots = 0;
      while (dots < module.size() && module[dots] == '.') ++dots;
      module = module.substr(dots);
      std::string base = dirname(importer);
      for (std::size_t i = 1; i < dots; ++i) {
        if (base.empty()) return {};
        base = dirname(base);
      }
      roots.push_back(base);
    } else {
      // importer's directory first, then each ancestor up to the repo root
      std::string dir = dirname(importer);
      for (;;) {
        roots.push_back(dir);
        if (dir.empty()) break;
        dir = dirname(dir);
      }
    }
    const std::string mod_path = dots_to_slashes(module);
    for (const auto& root : roots) {
      std::vector<std::string> found;
      if (!mod_path.empty()) {
        auto file = join(root, mod_path + ".py");
        if (has(file)) return {file};
      }
      const std::string pkg = mod_path.empty() ? root : join(root, mod_path);
      const std::string init = join(pkg, "__init__.py");
      bool package_init = has(init);
      bool used_init = false;
      for (const auto& name : ref.names) {
        auto sub = join(pkg, name + ".py");
        auto sub_pkg = join(join(pkg, name), "__init__.py");
        if (has(sub)) found.push_back(sub);
        else if (has(sub_pkg)) found.push_back(sub_pkg);
        else if (package_init && !used_init) {
          found.push_back(init);
          used_init = true;
        }
      }
      if (found.empty() && package_init && !mod_path.empty()) found.push_back(init);
      if (!found.empty()) return found;
    }
    return {};
  }

  std::vector<std::string> java(const ImportRef& ref) const {
    const std::string path = dots_to_slashes(ref.module);
    std::vector<std::string> out;
    if (ref.wildcard) {
      for (const auto& [dir, files] : java_dirs_)
        if (ends_with_path(dir, path)) out.insert(out.end(), files.begin(), files.end());
      return out;
    }
    // nested classes: a.b.Outer.Inner lives in a/b/Outer.java
    std::string candidate = path;
    while (!candidate.empty()) {
      for (const auto& p : paths_)
        if (ends_with_path(p, candidate + ".java")) return {p};
      auto slash = candidate.rfind('/');
      if (slash == std::string::npos) break;
      candidate.resize(slash);
    }
    return out;
  }

  std::vector<std::string> cpp(const std::string& importer, const ImportRef& ref) const {
    if (!ref.system) {
      if (auto p = normalize(dirname(importer), ref.module); p && has(*p)) return {*p};
    }
    if (auto p = normalize("", ref.module); p && has(*p)) return {*p};
    std::optional<std::string> best;
    for (const auto& p : paths_) {
      if (!ends_with_path(p, ref.module)) continue;
      if (!best || p.size() < best->size()) best = p;  // set order makes ties lexicographic
    }
    if (best) return {*best};
    return {};
  }

  // Longest run of trailing path components shared with a package directory.
  // A partial match counts only for non-stdlib paths (dotted first element),
  // since the module root may sit anywhere in the repository.
  std::vector<std::string> go(const ImportRef& ref) const {
    auto parts = split_path(ref.module);
    if (parts.empty()) return {};
    const bool qualified = parts.front().find('.') != std::string::npos;
    const std::vector<std::string>* best = nullptr;
    std::size_t best_k = 0, best_len = 0;
    for (const auto& [dir, files] : go_dirs_) {
      if (dir.empty()) continue;
      auto dparts = split_path(dir);
      std::size_t k = 0;
      while (k < parts.size() && k < dparts.size() && parts[parts.size() - 1 - k] == dparts[dparts.size() - 1 - k]) ++k;
      if (k == 0 || (k < dparts.size() && !qualified)) continue;
      if (k > best_k || (k == best_k && dir.size() < best_len)) {
        best = &files;
        best_k = k;
        best_len = dir.size();
      }
    }
    return best ? *best : std::vector<std::string>{};
  }

  std::vector<std::string> js(const std::string& importer, const ImportRef& ref) const {
    if (!ref.relative) return {};
    auto base = normalize(dirname(importer), ref.module);
    if (!base) return {};
    static const std::vector<std::string> exts = {".ts", ".tsx", ".d.ts", ".js", ".jsx", ".mjs", ".cjs", ".mts", ".cts"};
    if (has(*base)) return {*base};
    for (const auto& e : exts)
      if (has(*base + e)) return {*base + e};
    // TS sources often import "./x.js" for x.ts
    auto dot = base->rfind('.');
    auto slash = base->rfind('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
      auto stem = base->substr(0, dot);
      for (const auto& e : exts)
        if (has(stem + e)) return {stem + e};
    }
    for (const auto& e : exts)
      if (has(*base + "/index" + e)) return {*base + "/index" + e};
    return {};
  }

  std::set<std::string> paths_;
  std::map<std::string, std::vector<std::string>> go_dirs_;
  std::map<std::string, std::vector<std::string>> java_dirs_;
};

}  // namespace

RepoIndex build_import_edges(RepoIndex index) {
  index.import_edges.clear();
  const Resolver resolver(index);
  for (const auto& file : index.files) {
    std::vector<ImportRef> refs;
    try {
      refs = extract_imports(parse(file));
    } catch (const std::exception& e) {
      spdlog::warn("imports: cannot parse {}: {}", file.path, e.what());
      continue;
    }
    std::set<std::pair<std::string, bool>> seen;
    for (const auto& ref : refs) {
      auto targets = resolver.resolve(file, ref);
      if (targets.empty()) {
        if (seen.insert({ref.module, true}).second)
          index.import_edges.push_back({file.path, ref.module, true, ref.module, ref.statement});
        continue;
      }
      for (auto& t : targets) {
        if (t == file.path) continue;
        if (seen.insert({t, false}).second)
          index.import_edges.push_back({file.path, std::move(t), false, ref.module, ref.statement});
      }
    }
  }
  return index;
}

}  // namespace fimforge
