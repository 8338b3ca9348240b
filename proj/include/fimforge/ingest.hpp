#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fimforge/chunking.hpp"
#include "fimforge/language.hpp"
#include "fimforge/source_file.hpp"

namespace fimforge {

struct IngestConfig {
  std::string repo_id;  // empty: name of the root directory
  ExtensionMap extensions = default_extension_map();
  std::uintmax_t max_file_bytes = 10u << 20;  // scan-time hard limit
  std::vector<std::string> skip_dirs = {".git", ".hg", ".svn", "node_modules", "__pycache__"};
  std::optional<int> min_stars;  // carried through to outputs, never enforced
  unsigned jobs = 1;
};

/// A file the scan saw but did not admit.
struct ScanSkip {
  std::string path;
  std::string reason;  // "binary", "invalid_utf8", "too_large", "unreadable"
  std::optional<std::string> sha256;
  std::optional<Language> language;
  std::uintmax_t byte_count = 0;
};

/// importer -> imported. External edges keep the module name in `to`.
struct ImportEdge {
  std::string from;
  std::string to;
  bool external = false;
  std::string module;
  std::string statement;

  bool operator==(const ImportEdge&) const = default;
};

struct RepoIndex {
  std::string repo_id;
  std::vector<SourceFile> files;  // sorted by path
  std::vector<ImportEdge> import_edges;
  std::map<std::string, std::vector<Chunk>> chunk_table;
  std::vector<ScanSkip> skipped;
  std::optional<int> min_stars;

  const SourceFile* find(std::string_view path) const;
  /// Intra-repo targets imported by `path`, in import order, without repeats.
  std::vector<std::string> dependencies_of(std::string_view path) const;
};

/// Walks `root` and reads every file whose extension maps to a language.
/// Throws Error when the root is missing or unreadable.
RepoIndex scan_repo(const std::filesystem::path& root, const IngestConfig& config);

// ---------------------------------------------------------------------------
// Heuristic rules

enum class RuleKind {
  max_file_bytes,
  empty_content,
  min_lines,
  max_lines,
  max_line_length,
  max_avg_line_length,
  min_alnum_fraction,
  max_digit_fraction,
  max_whitespace_fraction,
  max_non_ascii_fraction,
  autogenerated_marker,
  max_blob_fraction,
  max_duplicate_line_fraction,
  max_comment_line_fraction,
  forbidden_pattern,
};

std::string_view to_string(RuleKind kind);
std::optional<RuleKind> rule_kind_from_name(std::string_view name);

struct FilterRule {
  std::string id;
  RuleKind kind = RuleKind::max_file_bytes;
  double threshold = 0;
  std::vector<std::string> patterns;   // markers / regexes, kind-dependent
  std::vector<Language> languages;     // empty: all languages
  std::string reason;

  bool applies_to(Language language) const;
  /// True when the file violates the rule.
  bool fails(const SourceFile& file) const;
};

using RuleSet = std::vector<FilterRule>;

const RuleSet& default_rules();
/// Reads {"rules": [...], "replace_defaults": bool} from JSON text.
RuleSet load_rules(const std::string& json_text);

struct RuleDrops {
  std::string rule_id;
  std::string reason;
  std::size_t dropped = 0;
};

struct FilterReport {
  std::size_t ingested = 0;
  std::size_t retained = 0;
  std::vector<RuleDrops> drops;  // one entry per rule, rule order
};

struct FilterOutcome {
  std::vector<SourceFile> retained;
  FilterReport report;
  std::map<std::string, std::string> drop_rule;  // path -> rule id
};

/// First failing rule's id for the file, if any.
std::optional<std::string> first_failing_rule(const SourceFile& file, const RuleSet& rules);

/// Throws ConfigError on an empty rule set.
FilterOutcome apply_heuristic_filters(const std::vector<SourceFile>& files, const RuleSet& rules,
                                      unsigned jobs = 1);

// ---------------------------------------------------------------------------
// Index assembly

/// Resolves imports syntactically and fills import_edges.
RepoIndex build_import_edges(RepoIndex index);
void build_chunk_table(RepoIndex& index);

struct IngestResult {
  RepoIndex index;
  FilterReport report;
  std::map<std::string, std::string> drop_rule;
  std::vector<SourceFile> scanned;  // everything admitted by the scan, pre-filter
};

/// scan_repo, apply_heuristic_filters, build_import_edges, build_chunk_table.
IngestResult ingest_repo(const std::filesystem::path& root, const IngestConfig& config,
                         const RuleSet& rules);

}  // namespace fimforge
