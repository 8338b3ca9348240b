#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <unordered_map>
#include <unordered_set>

#include "fimforge/error.hpp"
#include "fimforge/ingest.hpp"
#include "fimforge/parallel.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

namespace {

constexpr std::array<std::pair<RuleKind, std::string_view>, 15> kRuleNames = {{
    {RuleKind::max_file_bytes, "max_file_bytes"},
    {RuleKind::empty_content, "empty_content"},
    {RuleKind::min_lines, "min_lines"},
    {RuleKind::max_lines, "max_lines"},
    {RuleKind::max_line_length, "max_line_length"},
    {RuleKind::max_avg_line_length, "max_avg_line_length"},
    {RuleKind::min_alnum_fraction, "min_alnum_fraction"},
    {RuleKind::max_digit_fraction, "max_digit_fraction"},
    {RuleKind::max_whitespace_fraction, "max_whitespace_fraction"},
    {RuleKind::max_non_ascii_fraction, "max_non_ascii_fraction"},
    {RuleKind::autogenerated_marker, "autogenerated_marker"},
    {RuleKind::max_blob_fraction, "max_blob_fraction"},
    {RuleKind::max_duplicate_line_fraction, "max_duplicate_line_fraction"},
    {RuleKind::max_comment_line_fraction, "max_comment_line_fraction"},
    {RuleKind::forbidden_pattern, "forbidden_pattern"},
}};

bool is_fraction_kind(RuleKind k) {
  switch (k) {
    case RuleKind::min_alnum_fraction:
    case RuleKind::max_digit_fraction:
    case RuleKind::max_whitespace_fraction:
    case RuleKind::max_non_ascii_fraction:
    case RuleKind::max_blob_fraction:
    case RuleKind::max_duplicate_line_fraction:
    case RuleKind::max_comment_line_fraction:
      return true;
    default:
      return false;
  }
}

// Code points, not bytes: continuation bytes are not counted.
std::size_t char_count(std::string_view s) {
  std::size_t n = 0;
  for (char c : s)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

std::vector<std::string_view> lines_of(std::string_view content) {
  std::vector<std::string_view> out;
  for (auto& l : text::split_lines(content)) out.push_back(content.substr(l.begin, l.end - l.begin));
  return out;
}

double fraction_of(std::string_view s, bool (*pred)(unsigned char)) {
  std::size_t total = char_count(s);
  if (total == 0) return 0;
  std::size_t hits = 0;
  for (char c : s)
    if (pred(static_cast<unsigned char>(c))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(total);
}

bool is_blob_char(unsigned char c) { return std::isalnum(c) || c == '+' || c == '/' || c == '='; }

double blob_fraction(std::string_view s) {
  if (s.empty()) return 0;
  std::size_t blob = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_blob_char(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool digit = false;
    while (j < s.size() && is_blob_char(static_cast<unsigned char>(s[j]))) {
      digit = digit || std::isdigit(static_cast<unsigned char>(s[j]));
      ++j;
    }
    if (j - i >= 64 && digit) blob += j - i;
    i = j;
  }
  return static_cast<double>(blob) / static_cast<double>(s.size());
}

constexpr std::size_t kDuplicateMinLineChars = 8;
constexpr std::size_t kDuplicateMinLines = 10;

double duplicate_line_fraction(std::string_view content) {
  std::unordered_set<std::string_view> seen;
  std::size_t considered = 0;
  std::size_t dups = 0;
  for (auto line : lines_of(content)) {
    auto t = text::trim(line);
    if (t.size() < kDuplicateMinLineChars) continue;
    ++considered;
    if (!seen.insert(t).second) ++dups;
  }
  if (considered < kDuplicateMinLines) return 0;
  return static_cast<double>(dups) / static_cast<double>(considered);
}

bool is_comment_line(Language lang, std::string_view trimmed) {
  if (lang == Language::python) return text::starts_with(trimmed, "#");
  return text::starts_with(trimmed, "//") || text::starts_with(trimmed, "/*") ||
         text::starts_with(trimmed, "*");
}

double comment_line_fraction(const SourceFile& f) {
  std::size_t nonblank = 0;
  std::size_t comments = 0;
  for (auto line : lines_of(f.content)) {
    auto t = text::trim(line);
    if (t.empty()) continue;
    ++nonblank;
    if (is_comment_line(f.language, t)) ++comments;
  }
  if (nonblank == 0) return 0;
  return static_cast<double>(comments) / static_cast<double>(nonblank);
}

bool has_marker(std::string_view content, std::size_t max_lines, const std::vector<std::string>& markers) {
  auto lines = lines_of(content);
  if (lines.size() > max_lines) lines.resize(max_lines);
  for (auto line : lines) {
    auto lower = text::to_lower(line);
    for (const auto& m : markers)
      if (lower.find(text::to_lower(m)) != std::string::npos) return true;
  }
  return false;
}

const std::regex& compiled(const std::string& pattern) {
  thread_local std::unordered_map<std::string, std::regex> cache;
  auto it = cache.find(pattern);
  if (it == cache.end()) it = cache.emplace(pattern, std::regex(pattern, std::regex::ECMAScript)).first;
  return it->second;
}

void validate(const FilterRule& r) {
  if (r.id.empty()) throw ConfigError("filter rule without id");
  if (!(r.threshold >= 0)) throw ConfigError("rule " + r.id + ": threshold must be nonnegative");
  if (is_fraction_kind(r.kind) && r.threshold > 1) throw ConfigError("rule " + r.id + ": fraction above 1");
  if (r.kind == RuleKind::forbidden_pattern || r.kind == RuleKind::autogenerated_marker) {
    if (r.patterns.empty()) throw ConfigError("rule " + r.id + ": patterns required");
  }
  if (r.kind == RuleKind::forbidden_pattern) {
    for (const auto& p : r.patterns) {
      try {
        std::regex check(p);
      } catch (const std::regex_error& e) {
        throw ConfigError("rule " + r.id + ": bad pattern '" + p + "': " + e.what());
      }
    }
  }
}

}  // namespace

std::string_view to_string(RuleKind kind) {
  for (auto& [k, name] : kRuleNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<RuleKind> rule_kind_from_name(std::string_view name) {
  for (auto& [k, n] : kRuleNames)
    if (n == name) return k;
  return std::nullopt;
}

bool FilterRule::applies_to(Language language) const {
  return languages.empty() || std::find(languages.begin(), languages.end(), language) != languages.end();
}

bool FilterRule::fails(const SourceFile& f) const {
  if (!applies_to(f.language)) return false;
  const std::string_view c = f.content;
  switch (kind) {
    case RuleKind::max_file_bytes:
      return static_cast<double>(f.byte_count) > threshold;
    case RuleKind::empty_content:
      return text::is_blank(c);
    case RuleKind::min_lines:
      return static_cast<double>(f.line_count) < threshold;
    case RuleKind::max_lines:
      return static_cast<double>(f.line_count) > threshold;
    case RuleKind::max_line_length: {
      for (auto line : lines_of(c))
        if (static_cast<double>(char_count(line)) > threshold) return true;
      return false;
    }
    case RuleKind::max_avg_line_length: {
      auto lines = lines_of(c);
      if (lines.empty()) return false;
      std::size_t total = 0;
      for (auto line : lines) total += char_count(line);
      return static_cast<double>(total) / static_cast<double>(lines.size()) > threshold;
    }
    case RuleKind::min_alnum_fraction:
      return !c.empty() && fraction_of(c, [](unsigned char ch) { return std::isalnum(ch) != 0; }) < threshold;
    case RuleKind::max_digit_fraction:
      return fraction_of(c, [](unsigned char ch) { return std::isdigit(ch) != 0; }) > threshold;
    case RuleKind::max_whitespace_fraction:
      return fraction_of(c, [](unsigned char ch) { return std::isspace(ch) != 0; }) > threshold;
    case RuleKind::max_non_ascii_fraction: {
      std::size_t total = char_count(c);
      if (total == 0) return false;
      std::size_t wide = 0;
      for (char ch : c)
        if ((static_cast<unsigned char>(ch) & 0xC0) == 0xC0) ++wide;  // lead bytes only
      return static_cast<double>(wide) / static_cast<double>(total) > threshold;
    }
    case RuleKind::autogenerated_marker:
      return has_marker(c, static_cast<std::size_t>(threshold), patterns);
    case RuleKind::max_blob_fraction:
      return blob_fraction(c) > threshold;
    case RuleKind::max_duplicate_line_fraction:
      return duplicate_line_fraction(c) > threshold;
    case RuleKind::max_comment_line_fraction:
      return comment_line_fraction(f) > threshold;
    case RuleKind::forbidden_pattern:
      for (const auto& p : patterns)
        if (std::regex_search(f.content, compiled(p))) return true;
      return false;
  }
  return false;
}

const RuleSet& default_rules() {
  static const RuleSet rules = [] {
    RuleSet r = {
        {"max_file_bytes", RuleKind::max_file_bytes, 1048576, {}, {}, "file larger than 1 MiB"},
        {"empty_content", RuleKind::empty_content, 0, {}, {}, "file is empty or whitespace only"},
        {"min_lines", RuleKind::min_lines, 3, {}, {}, "fewer than 3 lines"},
        {"max_lines", RuleKind::max_lines, 10000, {}, {}, "more than 10000 lines"},
        {"max_line_length", RuleKind::max_line_length, 1000, {}, {}, "a line longer than 1000 characters"},
        {"max_avg_line_length", RuleKind::max_avg_line_length, 100, {}, {}, "mean line length above 100"},
        {"min_alnum_fraction", RuleKind::min_alnum_fraction, 0.25, {}, {}, "alphanumeric fraction below 0.25"},
        {"max_digit_fraction", RuleKind::max_digit_fraction, 0.5, {}, {}, "digit fraction above 0.5"},
        {"max_whitespace_fraction", RuleKind::max_whitespace_fraction, 0.75, {}, {}, "whitespace fraction above 0.75"},
        {"max_non_ascii_fraction", RuleKind::max_non_ascii_fraction, 0.3, {}, {}, "non-ASCII fraction above 0.3"},
        {"autogenerated_marker",
         RuleKind::autogenerated_marker,
         10,
         {"auto-generated", "autogenerated", "automatically generated", "do not edit", "@generated",
          "code generated by", "generated by the protocol buffer compiler"},
         {},
         "autogenerated-file marker in the first 10 lines"},
        {"max_blob_fraction", RuleKind::max_blob_fraction, 0.3, {}, {}, "hex/base64 blobs above 0.3 of bytes"},
        {"max_duplicate_line_fraction", RuleKind::max_duplicate_line_fraction, 0.5, {}, {},
         "more than half of substantial lines are repeats"},
        {"max_comment_line_fraction", RuleKind::max_comment_line_fraction, 0.9, {}, {},
         "over 90% of non-blank lines are comments"},
    };
    for (auto& rule : r) validate(rule);
    return r;
  }();
  return rules;
}

RuleSet load_rules(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("rule file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array())
    throw ConfigError("rule file needs a \"rules\" array");

  RuleSet out;
  if (!doc.value("replace_defaults", false)) out = default_rules();
  try {
    for (const auto& j : doc["rules"]) {
      FilterRule r;
      r.id = j.at("id").get<std::string>();
      auto kind_name = j.value("kind", r.id);
      auto kind = rule_kind_from_name(kind_name);
      if (!kind) throw ConfigError("rule " + r.id + ": unknown kind '" + kind_name + "'");
      r.kind = *kind;
      r.threshold = j.value("threshold", 0.0);
      r.patterns = j.value("patterns", std::vector<std::string>{});
      for (const auto& name : j.value("languages", std::vector<std::string>{})) {
        auto lang = language_from_name(name);
        if (!lang) throw ConfigError("rule " + r.id + ": unknown language '" + name + "'");
        r.languages.push_back(*lang);
      }
      r.reason = j.value("reason", std::string(to_string(r.kind)));
      validate(r);
      auto same = std::find_if(out.begin(), out.end(), [&](const FilterRule& x) { return x.id == r.id; });
      if (same != out.end()) throw ConfigError("duplicate rule id " + r.id);
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed rule entry: ") + e.what());
  }
  if (out.empty()) throw ConfigError("rule set is empty");
  return out;
}

std::optional<std::string> first_failing_rule(const SourceFile& file, const RuleSet& rules) {
  for (const auto& r : rules)
    if (r.fails(file)) return r.id;
  return std::nullopt;
}

FilterOutcome apply_heuristic_filters(const std::vector<SourceFile>& files, const RuleSet& rules,
                                      unsigned jobs) {
  if (rules.empty()) throw ConfigError("apply_heuristic_filters needs at least one rule");
  std::vector<std::optional<std::size_t>> failed(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (rules[r].fails(files[i])) {
        failed[i] = r;
        return;
      }
    }
  });

  FilterOutcome out;
  out.report.ingested = files.size();
  for (const auto& r : rules) out.report.drops.push_back({r.id, r.reason, 0});
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (failed[i]) {
      ++out.report.drops[*failed[i]].dropped;
      out.drop_rule[files[i].path] = rules[*failed[i]].id;
    } else {
      out.retained.push_back(files[i]);
    }
  }
  out.report.retained = out.retained.size();
  return out;
}

}  // namespace fimforge
