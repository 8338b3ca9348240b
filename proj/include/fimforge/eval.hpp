#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fimforge/preference.hpp"
#include "fimforge/prompt.hpp"
#include "fimforge/sample.hpp"

namespace fimforge {

struct EvalCase {
  std::string id;
  std::string language;
  std::string prefix;
  std::string suffix;
  std::string ground_truth;
  std::vector<ContextSnippet> context;
  std::size_t max_output_tokens = 0;  // 0: decoding default
  std::optional<FimLayout> format;    // unset: profile layout
};

/// Reads {id, language, prefix, suffix, ground_truth, context?, max_output_tokens?, format?}.
EvalCase case_from_json(const Json& j);

enum class Repetition { none, prefix_rep, suffix_rep };
std::string_view to_string(Repetition r);

/// 1 iff equal after normalizing line endings and trimming both ends.
int exact_match(std::string_view generated, std::string_view ground_truth);

/// 1 - levenshtein / max(len), over Unicode code points; 1 when both empty.
double edit_similarity(std::string_view a, std::string_view b);
std::size_t levenshtein(const std::u32string& a, const std::u32string& b);

/// Compares first non-blank lines with all whitespace removed: ground-truth
/// match wins, then the suffix line, then the prefix line.
Repetition classify_repetition(std::string_view generated, std::string_view prefix, std::string_view suffix,
                               std::string_view ground_truth);

struct EvalRecord {
  std::string case_id;
  std::string language;
  std::string generated;
  int em = 0;
  double es = 0;
  Repetition repetition = Repetition::none;
  std::optional<std::string> error;
};

/// Scores one generation against its case.
EvalRecord score_case(const EvalCase& c, std::string generated);

struct DecodingConfig {
  double temperature = 0.0;
  std::size_t max_tokens = 128;
};

struct EvalConfig {
  FormatProfile profile = builtin_profiles().at("psm");
  std::size_t intra_budget = 4096;
  std::size_t cross_budget = 4096;
  DecodingConfig decoding;
  unsigned in_flight = 4;
};

struct GroupStats {
  std::string name;
  std::size_t n = 0;
  double em = 0;  // means in [0, 1]
  double es = 0;
  double prefix_rep = 0;
  double suffix_rep = 0;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  std::vector<GroupStats> per_language;  // sorted by language
  GroupStats overall;
  std::size_t failures = 0;
};

/// Aggregates records into per-language and overall means.
EvalReport summarize(std::vector<EvalRecord> records);

/// Greedy (temperature 0) generation per case; endpoint failures become
/// empty generations with the error recorded.
EvalReport run_eval(const std::vector<EvalCase>& cases, Generator& generator, const EvalConfig& config);

Json to_json(const EvalRecord& r);
Json to_json(const EvalReport& report);
/// EM/ES table and repetition-rate table, percentages with one decimal.
std::string markdown_report(const EvalReport& report);

}  // namespace fimforge
