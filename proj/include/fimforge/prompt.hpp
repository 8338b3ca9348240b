#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fimforge/sample.hpp"
#include "fimforge/tokens.hpp"

namespace fimforge {

enum class FimLayout { PSM, SPM };

std::string_view to_string(FimLayout l);
std::optional<FimLayout> layout_from_name(std::string_view name);

/// Sentinel strings for one model family.
struct FormatProfile {
  std::string name;
  FimLayout layout = FimLayout::PSM;
  std::string prefix_token;
  std::string suffix_token;
  std::string middle_token;
  std::string file_separator;  // precedes each context snippet's path line
};

/// Built-in profiles: "psm" and "spm" (<fim_prefix>/<fim_suffix>/<fim_middle>).
const std::map<std::string, FormatProfile, std::less<>>& builtin_profiles();
/// Parses {"profiles": [...]} or a single profile object.
std::vector<FormatProfile> load_profiles(const std::string& json_text);
FormatProfile profile_from_json(const Json& j);
Json to_json(const FormatProfile& p);

struct PromptParts {
  std::string prefix;
  std::string suffix;
  std::vector<ContextSnippet> context;
};

/// Lays out context snippets then the FIM body. Context beyond cross_budget
/// drops lowest-score bm25 snippets first, then dependency snippets from the
/// end. Prefix is trimmed from its left edge and suffix from its right edge
/// to fit intra_budget; the suffix gets at most half unless the prefix needs
/// less. Budgets below 1 throw ConfigError.
std::string assemble_prompt(const PromptParts& parts, const FormatProfile& profile, std::size_t intra_budget,
                            std::size_t cross_budget, const TokenCounter& counter = default_token_counter());

/// Same, with the layout overridden.
std::string assemble_prompt(const PromptParts& parts, const FormatProfile& profile, FimLayout layout,
                            std::size_t intra_budget, std::size_t cross_budget,
                            const TokenCounter& counter = default_token_counter());

}  // namespace fimforge
