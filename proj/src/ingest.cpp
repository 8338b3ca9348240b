#include "fimforge/ingest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <system_error>

#include "fimforge/error.hpp"
#include "fimforge/hashing.hpp"
#include "fimforge/parallel.hpp"
#include "fimforge/text.hpp"

namespace fs = std::filesystem;

namespace fimforge {

const SourceFile* RepoIndex::find(std::string_view path) const {
  auto it = std::lower_bound(files.begin(), files.end(), path,
                             [](const SourceFile& f, std::string_view p) { return f.path < p; });
  if (it == files.end() || it->path != path) return nullptr;
  return &*it;
}

std::vector<std::string> RepoIndex::dependencies_of(std::string_view path) const {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  for (const auto& e : import_edges) {
    if (e.from != path || e.external) continue;
    if (seen.insert(e.to).second) out.push_back(e.to);
  }
  return out;
}

namespace {

struct Candidate {
  fs::path absolute;
  std::string relative;
  Language language;
};

bool looks_binary(std::string_view data) {
  return data.substr(0, 8192).find('\0') != std::string_view::npos;
}

std::optional<std::string> read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) return std::nullopt;
  return data;
}

}  // namespace

RepoIndex scan_repo(const fs::path& root, const IngestConfig& config) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error("repository root is not a readable directory: " + root.string());

  RepoIndex index;
  index.repo_id = config.repo_id.empty() ? fs::weakly_canonical(root).filename().string() : config.repo_id;
  index.min_stars = config.min_stars;

  std::vector<Candidate> candidates;
  try {
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied);
    for (auto end = fs::recursive_directory_iterator(); it != end; it.increment(ec)) {
      if (ec) {
        spdlog::warn("scan: {}", ec.message());
        ec.clear();
        continue;
      }
      const auto& entry = *it;
      const auto name = entry.path().filename().string();
      if (entry.is_symlink(ec)) {
        if (entry.is_directory(ec)) it.disable_recursion_pending();
        continue;
      }
      if (entry.is_directory(ec)) {
        if (std::find(config.skip_dirs.begin(), config.skip_dirs.end(), name) != config.skip_dirs.end())
          it.disable_recursion_pending();
        continue;
      }
      if (!entry.is_regular_file(ec)) continue;
      auto rel = fs::relative(entry.path(), root, ec).generic_string();
      if (ec) continue;
      auto lang = language_for_path(rel, config.extensions);
      if (!lang) continue;
      candidates.push_back({entry.path(), rel, *lang});
    }
  } catch (const fs::filesystem_error& e) {
    throw Error(std::string("cannot read repository root: ") + e.what());
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.relative < b.relative; });

  std::vector<std::optional<SourceFile>> read(candidates.size());
  std::vector<std::optional<ScanSkip>> skips(candidates.size());
  parallel_for(candidates.size(), config.jobs, [&](std::size_t i) {
    const auto& c = candidates[i];
    auto skip = [&](std::string reason, const std::string* data, std::uintmax_t size) {
      ScanSkip s{c.relative, std::move(reason), std::nullopt, c.language, size};
      if (data) s.sha256 = sha256_hex(*data);
      skips[i] = std::move(s);
    };
    std::error_code size_ec;
    auto size = fs::file_size(c.absolute, size_ec);
    if (!size_ec && size > config.max_file_bytes) return skip("too_large", nullptr, size);
    auto data = read_all(c.absolute);
    if (!data) {
      spdlog::warn("skipping unreadable file {}", c.relative);
      return skip("unreadable", nullptr, 0);
    }
    if (looks_binary(*data)) return skip("binary", &*data, data->size());
    if (!text::is_valid_utf8(*data)) return skip("invalid_utf8", &*data, data->size());
    read[i] = SourceFile::make(index.repo_id, c.relative, c.language, std::move(*data));
  });

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (read[i]) index.files.push_back(std::move(*read[i]));
    if (skips[i]) index.skipped.push_back(std::move(*skips[i]));
  }
  return index;
}

void build_chunk_table(RepoIndex& index) {
  index.chunk_table.clear();
  for (const auto& f : index.files) index.chunk_table[f.path] = chunk_file(f);
}

IngestResult ingest_repo(const fs::path& root, const IngestConfig& config, const RuleSet& rules) {
  IngestResult result;
  result.index = scan_repo(root, config);
  result.scanned = result.index.files;
  auto outcome = apply_heuristic_filters(result.index.files, rules, config.jobs);
  result.index.files = std::move(outcome.retained);
  result.report = std::move(outcome.report);
  result.drop_rule = std::move(outcome.drop_rule);
  result.index = build_import_edges(std::move(result.index));
  build_chunk_table(result.index);
  spdlog::info("ingest {}: {} scanned, {} retained, {} skipped at scan", result.index.repo_id,
               result.report.ingested, result.report.retained, result.index.skipped.size());
  return result;
}

}  // namespace fimforge
