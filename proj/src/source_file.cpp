#include "fimforge/source_file.hpp"

#include "fimforge/text.hpp"

namespace fimforge {

SourceFile SourceFile::make(std::string repo_id, std::string path, Language language, std::string content) {
  SourceFile f;
  f.repo_id = std::move(repo_id);
  f.path = std::move(path);
  f.language = language;
  f.line_count = text::count_lines(content);
  f.byte_count = content.size();
  f.content = std::move(content);
  return f;
}

}  // namespace fimforge
