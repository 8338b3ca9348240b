#include "fimforge/language.hpp"

#include "fimforge/text.hpp"

namespace fimforge {

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::java: return "java";
    case Language::python: return "python";
    case Language::cpp: return "cpp";
    case Language::go: return "go";
    case Language::javascript: return "javascript";
    case Language::typescript: return "typescript";
  }
  return "unknown";
}

std::optional<Language> language_from_name(std::string_view name) {
  for (auto lang : kAllLanguages)
    if (to_string(lang) == name) return lang;
  return std::nullopt;
}

const ExtensionMap& default_extension_map() {
  static const ExtensionMap map = {
      {".java", Language::java},
      {".py", Language::python},
      {".cc", Language::cpp},   {".cpp", Language::cpp}, {".cxx", Language::cpp},
      {".hpp", Language::cpp},  {".hh", Language::cpp},  {".hxx", Language::cpp},
      {".h", Language::cpp},
      {".go", Language::go},
      {".js", Language::javascript}, {".mjs", Language::javascript},
      {".cjs", Language::javascript}, {".jsx", Language::javascript},
      {".ts", Language::typescript}, {".mts", Language::typescript},
      {".cts", Language::typescript},
  };
  return map;
}

std::optional<Language> language_for_path(std::string_view path, const ExtensionMap& map) {
  auto slash = path.find_last_of('/');
  auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  if (dot == std::string_view::npos || dot == 0) return std::nullopt;
  auto it = map.find(text::to_lower(name.substr(dot)));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

}  // namespace fimforge
