#pragma once

#include <cstddef>
#include <string>

#include "fimforge/language.hpp"

namespace fimforge {

/// One ingested file. Content is kept byte-for-byte as read from disk.
struct SourceFile {
  std::string repo_id;
  std::string path;  // repo-relative, '/'-separated
  Language language = Language::python;
  std::string content;
  std::size_t line_count = 0;
  std::size_t byte_count = 0;

  static SourceFile make(std::string repo_id, std::string path, Language language, std::string content);
};

}  // namespace fimforge
