#include "fimforge/prompt.hpp"

#include <algorithm>
#include <numeric>

#include "fimforge/error.hpp"

namespace fimforge {

std::string_view to_string(FimLayout l) { return l == FimLayout::PSM ? "PSM" : "SPM"; }

std::optional<FimLayout> layout_from_name(std::string_view name) {
  if (name == "PSM" || name == "psm") return FimLayout::PSM;
  if (name == "SPM" || name == "spm") return FimLayout::SPM;
  return std::nullopt;
}

const std::map<std::string, FormatProfile, std::less<>>& builtin_profiles() {
  static const std::map<std::string, FormatProfile, std::less<>> profiles = {
      {"psm", {"psm", FimLayout::PSM, "<fim_prefix>", "<fim_suffix>", "<fim_middle>", "<file_sep>"}},
      {"spm", {"spm", FimLayout::SPM, "<fim_prefix>", "<fim_suffix>", "<fim_middle>", "<file_sep>"}},
  };
  return profiles;
}

FormatProfile profile_from_json(const Json& j) {
  try {
    FormatProfile p;
    p.name = j.at("name").get<std::string>();
    auto layout = layout_from_name(j.value("layout", std::string("PSM")));
    if (!layout) throw ConfigError("profile " + p.name + ": layout must be PSM or SPM");
    p.layout = *layout;
    p.prefix_token = j.at("prefix").get<std::string>();
    p.suffix_token = j.at("suffix").get<std::string>();
    p.middle_token = j.at("middle").get<std::string>();
    p.file_separator = j.value("file_separator", std::string());
    return p;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed format profile: ") + e.what());
  }
}

Json to_json(const FormatProfile& p) {
  return Json{{"name", p.name},
              {"layout", to_string(p.layout)},
              {"prefix", p.prefix_token},
              {"suffix", p.suffix_token},
              {"middle", p.middle_token},
              {"file_separator", p.file_separator}};
}

std::vector<FormatProfile> load_profiles(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("profile file is not valid JSON: ") + e.what());
  }
  std::vector<FormatProfile> out;
  if (doc.is_object() && doc.contains("profiles")) {
    for (const auto& p : doc["profiles"]) out.push_back(profile_from_json(p));
  } else {
    out.push_back(profile_from_json(doc));
  }
  return out;
}

namespace {

std::string render_snippet(const ContextSnippet& s, const FormatProfile& profile) {
  std::string out = profile.file_separator;
  out += s.source_path;
  out += '\n';
  out += s.text;
  if (s.text.empty() || s.text.back() != '\n') out += '\n';
  return out;
}

}  // namespace

std::string assemble_prompt(const PromptParts& parts, const FormatProfile& profile, std::size_t intra_budget,
                            std::size_t cross_budget, const TokenCounter& counter) {
  return assemble_prompt(parts, profile, profile.layout, intra_budget, cross_budget, counter);
}

std::string assemble_prompt(const PromptParts& parts, const FormatProfile& profile, FimLayout layout,
                            std::size_t intra_budget, std::size_t cross_budget, const TokenCounter& counter) {
  if (intra_budget < 1 || cross_budget < 1) throw ConfigError("prompt budgets must be at least 1 token");

  // cross-file context
  const auto& ctx = parts.context;
  std::vector<std::string> rendered;
  std::vector<std::size_t> cost;
  std::size_t total = 0;
  for (const auto& s : ctx) {
    rendered.push_back(render_snippet(s, profile));
    cost.push_back(counter.count(rendered.back()));
    total += cost.back();
  }
  std::vector<bool> keep(ctx.size(), true);
  if (total > cross_budget) {
    std::vector<std::size_t> bm25;
    std::vector<std::size_t> deps;
    for (std::size_t i = 0; i < ctx.size(); ++i) (ctx[i].score ? bm25 : deps).push_back(i);
    std::stable_sort(bm25.begin(), bm25.end(), [&](std::size_t a, std::size_t b) { return *ctx[a].score < *ctx[b].score; });
    std::vector<std::size_t> order = bm25;
    order.insert(order.end(), deps.rbegin(), deps.rend());
    for (std::size_t i : order) {
      if (total <= cross_budget) break;
      keep[i] = false;
      total -= cost[i];
    }
  }

  // intra-file context
  std::string_view prefix = parts.prefix;
  std::string_view suffix = parts.suffix;
  const std::size_t pt = counter.count(prefix);
  const std::size_t st = counter.count(suffix);
  if (pt + st > intra_budget) {
    std::size_t suffix_alloc = std::min(st, intra_budget / 2);
    std::size_t prefix_alloc = std::min(pt, intra_budget - suffix_alloc);
    suffix_alloc = std::min(st, intra_budget - prefix_alloc);
    prefix = prefix.substr(counter.keep_last(prefix, prefix_alloc));
    suffix = suffix.substr(0, counter.keep_first(suffix, suffix_alloc));
  }

  std::string out;
  for (std::size_t i = 0; i < ctx.size(); ++i)
    if (keep[i]) out += rendered[i];
  if (layout == FimLayout::PSM) {
    out += profile.prefix_token;
    out += prefix;
    out += profile.suffix_token;
    out += suffix;
  } else {
    out += profile.suffix_token;
    out += suffix;
    out += profile.prefix_token;
    out += prefix;
  }
  out += profile.middle_token;
  return out;
}

}  // namespace fimforge
