#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fimforge/error.hpp"
#include "fimforge/sample.hpp"

namespace fimforge {

struct ComplexityRecord {
  std::string sample_id;
  std::size_t identifier_count = 0;
  std::size_t rank = 0;  // 1-based
};

/// Stable descending sort by count, ties by id ascending; ranks 1..N.
std::vector<ComplexityRecord> rank_by_complexity(std::vector<std::pair<std::string, std::size_t>> counts);

enum class ComplexityScope { file, middle };

std::string_view to_string(ComplexityScope s);
std::optional<ComplexityScope> complexity_scope_from_name(std::string_view name);

/// Identifier count of the reconstructed file (prefix + middle + suffix) or
/// of the middle alone.
std::size_t sample_complexity(const FimSample& sample, ComplexityScope scope);

/// The first ceil(k_fraction * N) records. Throws ConfigError unless 0 <= k <= 1.
std::vector<std::string> select_top_fraction(const std::vector<ComplexityRecord>& ranked, double k_fraction = 0.30);

struct CurriculumConfig {
  double k_fraction = 0.30;
  ComplexityScope scope = ComplexityScope::file;
  bool per_pool = true;  // FIM and function_body samples selected separately
};

struct CurriculumEntry {
  std::string sample_id;
  std::size_t identifier_count = 0;
  std::string pool;
  std::size_t pool_rank = 0;
};

/// Selected samples ordered by count desc, id asc.
std::vector<CurriculumEntry> build_curriculum(const std::vector<FimSample>& samples, const CurriculumConfig& config,
                                              unsigned jobs = 1);

}  // namespace fimforge
