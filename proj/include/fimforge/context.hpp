#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fimforge/chunking.hpp"
#include "fimforge/ingest.hpp"
#include "fimforge/sample.hpp"
#include "fimforge/tokens.hpp"

namespace fimforge {

struct Bm25Stats {
  std::size_t N = 0;
  double avgdl = 0;
  std::unordered_map<std::string, std::size_t> df;
  double k1 = 1.2;
  double b = 0.75;

  /// ln(1 + (N - df + 0.5) / (df + 0.5))
  double idf(const std::string& term) const;
};

Bm25Stats compute_bm25_stats(const std::vector<const Chunk*>& chunks, double k1 = 1.2, double b = 0.75);

/// Okapi BM25 over the distinct query terms; terms absent from the chunk add 0.
double bm25_score(const std::vector<std::string>& query_terms, const Chunk& chunk, const Bm25Stats& stats);

/// Terms of middle + last m prefix lines + first m suffix lines.
std::vector<std::string> build_query(const FimSample& sample, std::size_t m = 5);

struct ContextConfig {
  std::size_t adjacent_lines = 5;
  double k1 = 1.2;
  double b = 0.75;
  std::size_t bm25_budget = 2048;
  std::size_t dependency_budget = 2048;
  std::size_t k_max = 10;
  bool use_bm25 = true;
  bool use_dependencies = true;
};

/// Inverted index over every chunk of a RepoIndex. Read-only after construction.
class Bm25Index {
 public:
  Bm25Index(const RepoIndex& index, double k1 = 1.2, double b = 0.75);

  const Bm25Stats& stats() const { return stats_; }
  const std::vector<const Chunk*>& chunks() const { return chunks_; }

  struct Hit {
    const Chunk* chunk;
    double score;
  };
  /// Chunks with positive score, sorted by (score desc, path asc, start_line asc).
  std::vector<Hit> search(const std::vector<std::string>& query_terms, std::string_view exclude_path = {}) const;

 private:
  std::vector<const Chunk*> chunks_;
  Bm25Stats stats_;
  std::unordered_map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> postings_;  // term -> (chunk, tf)
};

/// Greedy take of the best chunks from other files until the next one would
/// overflow `budget` or k_max snippets are taken.
std::vector<ContextSnippet> retrieve_similar(const FimSample& sample, const Bm25Index& index, std::size_t budget,
                                             std::size_t k_max, std::size_t m = 5,
                                             const TokenCounter& counter = default_token_counter());

/// Skeletons of intra-repo import targets, computed once per file.
class SkeletonCache {
 public:
  explicit SkeletonCache(const RepoIndex& index, unsigned jobs = 1);
  /// Empty when the file is unknown or has no declarations.
  const std::string& skeleton(std::string_view path) const;

 private:
  std::map<std::string, std::string, std::less<>> skeletons_;
};

/// One snippet per intra-repo import of sample.path, in import order; stops
/// at the first skeleton that does not fit the remaining budget.
std::vector<ContextSnippet> retrieve_dependencies(const FimSample& sample, const RepoIndex& index,
                                                  const SkeletonCache& skeletons, std::size_t budget,
                                                  const TokenCounter& counter = default_token_counter());

/// Replaces each sample's context with bm25 snippets followed by dependency snippets.
void attach_context(std::vector<FimSample>& samples, const RepoIndex& index, const ContextConfig& config,
                    unsigned jobs = 1, const TokenCounter& counter = default_token_counter());

}  // namespace fimforge
