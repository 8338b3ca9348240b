#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fimforge/sample.hpp"

namespace fimforge {

/// One compact JSON line; invalid UTF-8 is replaced rather than thrown on.
std::string json_line(const Json& j);

/// Writes to a temporary sibling and renames into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);
std::string read_file(const std::filesystem::path& path);

/// Calls fn for every non-empty line; parse errors name the file and line.
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&)>& fn);
std::vector<Json> read_jsonl(const std::filesystem::path& path);

}  // namespace fimforge
