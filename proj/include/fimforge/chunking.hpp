#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fimforge/source_file.hpp"

namespace fimforge {

inline constexpr std::size_t kMaxChunkLines = 19;

/// A retrieval unit: a run of non-blank lines, at most 19 lines long.
struct Chunk {
  std::string path;
  std::size_t start_line = 0;  // 1-based, inclusive
  std::size_t end_line = 0;    // 1-based, inclusive
  std::string text;
  std::map<std::string, std::size_t> term_frequencies;
  std::size_t length = 0;  // total term count
};

/// Splits on maximal runs of blank lines; blocks of 20 or more lines are cut
/// into consecutive 19-line pieces.
std::vector<Chunk> chunk_file(const SourceFile& file);

/// Retrieval terms: alphanumeric runs split into camelCase/snake_case
/// subwords, lowercased.
std::vector<std::string> tokenize_for_retrieval(std::string_view text);

}  // namespace fimforge
