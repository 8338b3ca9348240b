#include "fimforge/context.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fimforge/parallel.hpp"
#include "fimforge/syntax.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

double Bm25Stats::idf(const std::string& term) const {
  auto it = df.find(term);
  const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
  return std::log(1.0 + (static_cast<double>(N) - d + 0.5) / (d + 0.5));
}

Bm25Stats compute_bm25_stats(const std::vector<const Chunk*>& chunks, double k1, double b) {
  Bm25Stats st;
  st.k1 = k1;
  st.b = b;
  st.N = chunks.size();
  std::size_t total = 0;
  for (const auto* c : chunks) {
    total += c->length;
    for (const auto& [term, tf] : c->term_frequencies) ++st.df[term];
  }
  st.avgdl = st.N == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(st.N);
  return st;
}

namespace {

double term_weight(double idf, double f, double dl, const Bm25Stats& st) {
  const double avgdl = st.avgdl > 0 ? st.avgdl : 1.0;
  return idf * f * (st.k1 + 1.0) / (f + st.k1 * (1.0 - st.b + st.b * dl / avgdl));
}

std::vector<std::string> distinct(const std::vector<std::string>& terms) {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const auto& t : terms)
    if (seen.insert(t).second) out.push_back(t);
  return out;
}

}  // namespace

double bm25_score(const std::vector<std::string>& query_terms, const Chunk& chunk, const Bm25Stats& stats) {
  double score = 0;
  for (const auto& t : distinct(query_terms)) {
    auto it = chunk.term_frequencies.find(t);
    if (it == chunk.term_frequencies.end()) continue;
    score += term_weight(stats.idf(t), static_cast<double>(it->second), static_cast<double>(chunk.length), stats);
  }
  return score;
}

std::vector<std::string> build_query(const FimSample& sample, std::size_t m) {
  std::string q = sample.middle;
  const std::string_view prefix = sample.prefix;
  const std::string_view suffix = sample.suffix;
  auto pl = text::split_lines(prefix);
  if (!pl.empty() && m > 0) {
    auto first = pl.size() > m ? pl.size() - m : 0;
    q += '\n';
    q += prefix.substr(pl[first].begin);
  }
  auto sl = text::split_lines(suffix);
  if (!sl.empty() && m > 0) {
    auto last = std::min(sl.size(), m) - 1;
    q += '\n';
    q += suffix.substr(0, sl[last].end);
  }
  return tokenize_for_retrieval(q);
}

Bm25Index::Bm25Index(const RepoIndex& index, double k1, double b) {
  for (const auto& [path, chunks] : index.chunk_table)
    for (const auto& c : chunks) chunks_.push_back(&c);
  stats_ = compute_bm25_stats(chunks_, k1, b);
  for (std::size_t i = 0; i < chunks_.size(); ++i)
    for (const auto& [term, tf] : chunks_[i]->term_frequencies) postings_[term].emplace_back(i, tf);
}

std::vector<Bm25Index::Hit> Bm25Index::search(const std::vector<std::string>& query_terms,
                                              std::string_view exclude_path) const {
  std::unordered_map<std::size_t, double> acc;
  for (const auto& t : distinct(query_terms)) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    const double idf = stats_.idf(t);
    for (auto [ci, tf] : it->second)
      acc[ci] += term_weight(idf, static_cast<double>(tf), static_cast<double>(chunks_[ci]->length), stats_);
  }
  std::vector<Hit> hits;
  for (auto [ci, score] : acc) {
    if (!(score > 0)) continue;
    if (!exclude_path.empty() && chunks_[ci]->path == exclude_path) continue;
    hits.push_back({chunks_[ci], score});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.chunk->path != b.chunk->path) return a.chunk->path < b.chunk->path;
    return a.chunk->start_line < b.chunk->start_line;
  });
  return hits;
}

std::vector<ContextSnippet> retrieve_similar(const FimSample& sample, const Bm25Index& index, std::size_t budget,
                                             std::size_t k_max, std::size_t m, const TokenCounter& counter) {
  std::vector<ContextSnippet> out;
  std::size_t used = 0;
  for (const auto& hit : index.search(build_query(sample, m), sample.path)) {
    if (out.size() >= k_max) break;
    auto cost = counter.count(hit.chunk->text);
    if (used + cost > budget) break;
    used += cost;
    out.push_back({hit.chunk->path, ContextChannel::bm25, hit.chunk->text, hit.score, cost});
  }
  return out;
}

SkeletonCache::SkeletonCache(const RepoIndex& index, unsigned jobs) {
  std::set<std::string> targets;
  for (const auto& e : index.import_edges)
    if (!e.external) targets.insert(e.to);
  std::vector<const SourceFile*> files;
  for (const auto& t : targets)
    if (const auto* f = index.find(t)) files.push_back(f);
  std::vector<std::string> out(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) { out[i] = extract_skeleton(parse(*files[i])); });
  for (std::size_t i = 0; i < files.size(); ++i) skeletons_.emplace(files[i]->path, std::move(out[i]));
}

const std::string& SkeletonCache::skeleton(std::string_view path) const {
  static const std::string empty;
  auto it = skeletons_.find(path);
  return it == skeletons_.end() ? empty : it->second;
}

std::vector<ContextSnippet> retrieve_dependencies(const FimSample& sample, const RepoIndex& index,
                                                  const SkeletonCache& skeletons, std::size_t budget,
                                                  const TokenCounter& counter) {
  std::vector<ContextSnippet> out;
  std::size_t used = 0;
  auto deps = index.dependencies_of(sample.path);
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const auto& sk = skeletons.skeleton(deps[i]);
    if (sk.empty()) continue;
    auto cost = counter.count(sk);
    if (used + cost > budget) {
      spdlog::debug("context: {} dependency skeleton(s) of {} dropped at budget {}", deps.size() - i, sample.path,
                    budget);
      break;
    }
    used += cost;
    out.push_back({deps[i], ContextChannel::dependency, sk, std::nullopt, cost});
  }
  return out;
}

void attach_context(std::vector<FimSample>& samples, const RepoIndex& index, const ContextConfig& config,
                    unsigned jobs, const TokenCounter& counter) {
  std::optional<Bm25Index> bm25;
  if (config.use_bm25) bm25.emplace(index, config.k1, config.b);
  std::optional<SkeletonCache> skeletons;
  if (config.use_dependencies) skeletons.emplace(index, jobs);
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    auto& s = samples[i];
    s.context.clear();
    if (bm25) s.context = retrieve_similar(s, *bm25, config.bm25_budget, config.k_max, config.adjacent_lines, counter);
    if (skeletons) {
      auto deps = retrieve_dependencies(s, index, *skeletons, config.dependency_budget, counter);
      s.context.insert(s.context.end(), deps.begin(), deps.end());
    }
  });
}

}  // namespace fimforge
