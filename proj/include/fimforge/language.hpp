#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fimforge {

enum class Language { java, python, cpp, go, javascript, typescript };

inline constexpr std::array<Language, 6> kAllLanguages = {
    Language::java, Language::python, Language::cpp,
    Language::go, Language::javascript, Language::typescript};

std::string_view to_string(Language lang);
std::optional<Language> language_from_name(std::string_view name);

/// Extension (with leading dot, lowercase) to language.
using ExtensionMap = std::map<std::string, Language, std::less<>>;
const ExtensionMap& default_extension_map();

std::optional<Language> language_for_path(std::string_view path, const ExtensionMap& map);

}  // namespace fimforge
