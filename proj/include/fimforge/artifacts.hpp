#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fimforge/curriculum.hpp"
#include "fimforge/ingest.hpp"
#include "fimforge/preference.hpp"
#include "fimforge/quality.hpp"
#include "fimforge/sample.hpp"

namespace fimforge {

// repo_index.jsonl: one record per scanned file, retained or not.
std::string repo_index_jsonl(const IngestResult& result);
// corpus.jsonl: retained files with content; imports.jsonl: edges.
std::string corpus_jsonl(const RepoIndex& index);
std::string imports_jsonl(const RepoIndex& index);
Json filter_report_json(const std::string& repo_id, const FilterReport& report);

/// Rebuilds per-repo indexes (files, edges, chunk table) from corpus.jsonl and imports.jsonl.
std::map<std::string, RepoIndex> load_indexes(const std::filesystem::path& corpus,
                                              const std::filesystem::path& imports);

std::string samples_jsonl(const std::vector<FimSample>& samples);
std::vector<FimSample> load_samples(const std::filesystem::path& path);

std::string pairs_jsonl(const std::vector<PreferencePair>& pairs);
std::vector<PreferencePair> load_pairs(const std::filesystem::path& path);

std::string scores_jsonl(const std::vector<ScoredSample>& scores);
std::vector<ScoredSample> load_scores(const std::filesystem::path& path);

std::string curriculum_jsonl(const std::vector<CurriculumEntry>& entries);

}  // namespace fimforge
