#include "fimforge/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <unordered_map>

#include "fimforge/error.hpp"
#include "fimforge/hashing.hpp"
#include "fimforge/parallel.hpp"
#include "fimforge/syntax.hpp"

namespace fimforge {

std::vector<ComplexityRecord> rank_by_complexity(std::vector<std::pair<std::string, std::size_t>> counts) {
  std::stable_sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<ComplexityRecord> out;
  out.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out.push_back({std::move(counts[i].first), counts[i].second, i + 1});
  return out;
}

std::string_view to_string(ComplexityScope s) { return s == ComplexityScope::file ? "file" : "middle"; }

std::optional<ComplexityScope> complexity_scope_from_name(std::string_view name) {
  if (name == "file") return ComplexityScope::file;
  if (name == "middle") return ComplexityScope::middle;
  return std::nullopt;
}

std::size_t sample_complexity(const FimSample& s, ComplexityScope scope) {
  if (scope == ComplexityScope::middle) return count_identifiers(parse(s.language, s.middle));
  std::string full = s.prefix + s.middle + s.suffix;
  return count_identifiers(parse(s.language, full));
}

std::vector<std::string> select_top_fraction(const std::vector<ComplexityRecord>& ranked, double k_fraction) {
  if (!(k_fraction >= 0 && k_fraction <= 1)) throw ConfigError("k_fraction must lie in [0, 1]");
  const double want = std::ceil(k_fraction * static_cast<double>(ranked.size()) - 1e-9);
  const auto n = std::min(ranked.size(), static_cast<std::size_t>(std::max(0.0, want)));
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ranked[i].sample_id);
  return out;
}

std::vector<CurriculumEntry> build_curriculum(const std::vector<FimSample>& samples, const CurriculumConfig& config,
                                              unsigned jobs) {
  // identical reconstructed files are parsed once
  std::vector<std::size_t> counts(samples.size());
  std::unordered_map<std::string, std::size_t> cache;
  std::mutex mu;
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const auto& s = samples[i];
    std::string key;
    if (config.scope == ComplexityScope::file) {
      key = std::string(to_string(s.language)) + ':' + sha256_hex(s.prefix + s.middle + s.suffix);
      std::lock_guard lock(mu);
      if (auto it = cache.find(key); it != cache.end()) {
        counts[i] = it->second;
        return;
      }
    }
    counts[i] = sample_complexity(s, config.scope);
    if (!key.empty()) {
      std::lock_guard lock(mu);
      cache.emplace(key, counts[i]);
    }
  });

  std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> pools;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::string pool = !config.per_pool ? "all" : samples[i].strategy == Strategy::function_body ? "function" : "infill";
    pools[pool].emplace_back(samples[i].id, counts[i]);
  }
  std::vector<CurriculumEntry> out;
  for (auto& [pool, items] : pools) {
    auto ranked = rank_by_complexity(std::move(items));
    auto n = select_top_fraction(ranked, config.k_fraction).size();
    for (std::size_t i = 0; i < n; ++i) out.push_back({ranked[i].sample_id, ranked[i].identifier_count, pool, ranked[i].rank});
  }
  std::sort(out.begin(), out.end(), [](const CurriculumEntry& a, const CurriculumEntry& b) {
    if (a.identifier_count != b.identifier_count) return a.identifier_count > b.identifier_count;
    return a.sample_id < b.sample_id;
  });
  return out;
}

}  // namespace fimforge
