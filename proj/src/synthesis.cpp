#include "fimforge/synthesis.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <unordered_set>

#include "fimforge/error.hpp"
#include "fimforge/parallel.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

namespace {

// A candidate middle. `aux` is strategy-specific (end of trimmed text for
// random intra-line cuts, line index for random lines).
struct Target {
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::uint32_t aux = 0;
  std::string_view kind;
};

using Targets = std::vector<Target>;

bool nonblank(std::string_view content, std::uint32_t a, std::uint32_t b) {
  return b > a && !text::is_blank(content.substr(a, b - a));
}

std::uint32_t line_end_from(std::string_view s, std::uint32_t pos) {
  auto nl = s.find('\n', pos);
  std::uint32_t end = nl == std::string_view::npos ? static_cast<std::uint32_t>(s.size()) : static_cast<std::uint32_t>(nl);
  if (end > pos && s[end - 1] == '\r') --end;
  return end;
}

std::uint32_t skip_blanks(std::string_view s, std::uint32_t pos, std::uint32_t limit) {
  while (pos < limit && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  return pos;
}

const NodeSelector& cached_selector(Language lang, Strategy s) {
  static const auto table = [] {
    std::map<std::pair<Language, Strategy>, NodeSelector> m;
    for (auto l : kAllLanguages)
      for (auto st : kAllStrategies)
        if (is_ast_strategy(st)) m.emplace(std::pair{l, st}, selector_for(l, st));
    return m;
  }();
  return table.at({lang, s});
}

Targets ast_targets(const SyntaxTree& tree, Strategy s, const SynthesisConfig& cfg) {
  Targets out;
  const auto src = tree.source();
  for (const auto& sel : select_nodes(tree, cached_selector(tree.language(), s), cfg.ast_bounds)) {
    if (!nonblank(src, sel.span.start, sel.span.end)) continue;
    out.push_back({sel.span.start, sel.span.end, 0, tree.node(sel.id).kind});
  }
  return out;
}

Targets intra_line_targets(std::string_view content) {
  Targets out;
  const auto lines = text::split_lines(content);
  for (std::uint32_t i = 0; i < lines.size(); ++i) {
    auto line = content.substr(lines[i].begin, lines[i].end - lines[i].begin);
    auto lt = text::ltrim(line);
    auto t = text::trim(line);
    if (t.empty()) continue;
    auto a = static_cast<std::uint32_t>(lines[i].begin + (line.size() - lt.size()));
    auto b = static_cast<std::uint32_t>(a + t.size());
    // needs a code-point boundary strictly between a and b
    bool inner = false;
    for (auto p = a + 1; p < b && !inner; ++p) inner = (static_cast<unsigned char>(content[p]) & 0xC0) != 0x80;
    if (inner) out.push_back({a, static_cast<std::uint32_t>(lines[i].end), b, "line"});
  }
  return out;
}

void add_cut(Targets& out, std::string_view src, std::uint32_t cut, std::string_view kind, std::size_t max_bytes) {
  auto end = line_end_from(src, cut);
  cut = skip_blanks(src, cut, end);
  if (!nonblank(src, cut, end) || end - cut > max_bytes) return;
  out.push_back({cut, end, 0, kind});
}

Targets trigger_targets(const SyntaxTree* tree, std::string_view src, const SynthesisConfig& cfg) {
  Targets out;
  if (!cfg.triggers.empty()) {
    for (const auto& trig : cfg.triggers) {
      if (trig.empty()) continue;
      for (auto pos = src.find(trig); pos != std::string_view::npos; pos = src.find(trig, pos + 1))
        add_cut(out, src, static_cast<std::uint32_t>(pos + trig.size()), trig, cfg.max_middle_bytes);
    }
    std::sort(out.begin(), out.end(), [](const Target& a, const Target& b) { return a.start < b.start; });
    out.erase(std::unique(out.begin(), out.end(), [](const Target& a, const Target& b) { return a.start == b.start; }),
              out.end());
    return out;
  }
  if (!tree) throw Error("syntax_token mode needs a syntax tree or explicit triggers");
  const auto& triggers = trigger_tokens(tree->language());
  for (NodeId id = 0; id < tree->size(); ++id) {
    const auto& n = tree->node(id);
    if (n.named || n.in_error || n.is_missing || n.span.length() == 0) continue;
    for (const auto& trig : triggers) {
      if (trig.token != n.kind) continue;
      if (!trig.parent_kinds.empty()) {
        if (n.parent == kNoNode) break;
        auto pk = tree->node(n.parent).kind;
        if (std::find(trig.parent_kinds.begin(), trig.parent_kinds.end(), pk) == trig.parent_kinds.end()) break;
      }
      add_cut(out, src, n.span.end, trig.token, cfg.max_middle_bytes);
      break;
    }
  }
  return out;
}

bool is_open(std::string_view k) { return k == "(" || k == "[" || k == "{"; }
bool matches(std::string_view open, std::string_view close) {
  return (open == "(" && close == ")") || (open == "[" && close == "]") || (open == "{" && close == "}");
}

Targets paren_targets(const SyntaxTree& tree, const SynthesisConfig& cfg) {
  Targets out;
  const auto& kinds = bracket_container_kinds(tree.language());
  const auto src = tree.source();
  for (NodeId id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (!n.named || std::find(kinds.begin(), kinds.end(), n.kind) == kinds.end()) continue;
    if (tree.touches_error(id)) continue;
    auto kids = tree.children(id);
    if (kids.size() < 3) continue;
    const auto& open = tree.node(kids.front());
    const auto& close = tree.node(kids.back());
    if (open.named || close.named || !is_open(open.kind) || !matches(open.kind, close.kind)) continue;
    if (open.span.start != n.span.start || close.span.end != n.span.end) continue;
    auto a = open.span.end;
    auto b = close.span.start;
    if (!nonblank(src, a, b) || b - a > cfg.max_middle_bytes) continue;
    out.push_back({a, b, 0, n.kind});
  }
  return out;
}

Targets post_comment_targets(const SyntaxTree& tree, const SynthesisConfig& cfg) {
  Targets out;
  const auto lang = tree.language();
  const auto src = tree.source();
  for (NodeId id = 0; id < tree.size(); ++id) {
    const auto& c = tree.node(id);
    if (!c.named || !is_comment_kind(lang, c.kind) || c.in_error) continue;
    if (!tree.indentation_before(c.span.start)) continue;  // trailing comment
    std::uint32_t cend = c.span.end;
    while (cend > c.span.start && (src[cend - 1] == '\n' || src[cend - 1] == '\r')) --cend;
    if (!text::is_blank(src.substr(cend, line_end_from(src, cend) - cend))) continue;
    auto next = tree.next_named_sibling(id);
    if (!next) continue;
    const auto& nx = tree.node(*next);
    if (is_comment_kind(lang, nx.kind) || tree.touches_error(*next)) continue;
    if (tree.row_of(nx.span.start) != tree.row_of(cend) + 1) continue;
    if (!tree.indentation_before(nx.span.start)) continue;
    if (!nonblank(src, nx.span.start, nx.span.end) || nx.span.length() > cfg.max_middle_bytes) continue;
    out.push_back({nx.span.start, nx.span.end, 0, nx.kind});
  }
  return out;
}

// One entry per line; random_lines picks among them at realize time.
Targets line_targets(std::string_view content) {
  Targets out;
  const auto lines = text::split_lines(content);
  for (std::uint32_t i = 0; i < lines.size(); ++i)
    out.push_back({static_cast<std::uint32_t>(lines[i].begin), static_cast<std::uint32_t>(lines[i].end), i,
                   nonblank(content, lines[i].begin, lines[i].end) ? "line" : "blank"});
  return out;
}

bool line_targets_usable(const Targets& lines, bool multi) {
  bool any = std::any_of(lines.begin(), lines.end(), [](const Target& t) { return t.kind == "line"; });
  return any && (!multi || lines.size() >= 2);
}

struct FunctionTarget {
  Target target;
  std::string name;
  std::size_t doc_lines = 0;
};

std::vector<FunctionTarget> function_targets(const SyntaxTree& tree) {
  std::vector<FunctionTarget> out;
  const auto lang = tree.language();
  const auto& kinds = function_kinds(lang);
  const auto src = tree.source();
  for (NodeId id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (!n.named || std::find(kinds.begin(), kinds.end(), n.kind) == kinds.end()) continue;
    if (tree.touches_error(id)) continue;
    auto body = tree.child_by_field(id, "body");
    if (!body) continue;
    FunctionTarget ft;
    if (auto name = tree.child_by_field(id, "name")) ft.name = std::string(tree.text(*name));
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    if (lang == Language::python) {
      auto doc = python_docstring(tree, id);
      if (!doc) continue;
      a = tree.node(*doc).span.end;
      auto eol = line_end_from(src, a);
      if (text::is_blank(src.substr(a, eol - a))) {
        auto nl = src.find('\n', a);
        a = nl == std::string_view::npos ? static_cast<std::uint32_t>(src.size()) : static_cast<std::uint32_t>(nl + 1);
      }
      b = tree.node(*body).span.end;
      ft.doc_lines = text::count_lines(tree.text(*doc));
    } else {
      auto kids = tree.children(*body);
      if (kids.size() < 2) continue;
      const auto& open = tree.node(kids.front());
      const auto& close = tree.node(kids.back());
      if (open.kind != "{" || close.kind != "}") continue;
      NodeId anchor = id;
      if (n.parent != kNoNode) {
        auto pk = tree.node(n.parent).kind;
        if (pk == "export_statement" || pk == "template_declaration") anchor = n.parent;
      }
      auto docs = leading_comments(tree, anchor);
      if (docs.empty()) continue;
      for (NodeId d : docs) ft.doc_lines += text::count_lines(tree.text(d));
      a = open.span.end;
      b = close.span.start;
    }
    if (b <= a || !nonblank(src, a, b)) continue;
    ft.target = {a, b, 0, n.kind};
    out.push_back(std::move(ft));
  }
  return out;
}

Json meta_for(const Target& t, const char* key) {
  Json m = Json::object();
  if (!t.kind.empty()) m[key] = t.kind;
  return m;
}

std::optional<FimSample> realize_intra_random(const SourceFile& file, const Targets& ts, Rng& rng) {
  if (ts.empty()) return std::nullopt;
  const auto& t = ts[rng.index(ts.size())];
  std::vector<std::uint32_t> cuts;
  for (auto p = t.start + 1; p < t.aux; ++p)
    if ((static_cast<unsigned char>(file.content[p]) & 0xC0) != 0x80) cuts.push_back(p);
  auto cut = cuts[rng.index(cuts.size())];
  return make_sample(file, Strategy::random_intra_line, cut, t.end, Json{{"line", t.kind}});
}

std::optional<FimSample> realize_lines(const SourceFile& file, bool multi, const Targets& lines, Rng& rng,
                                       const SynthesisConfig& cfg) {
  if (!line_targets_usable(lines, multi)) return std::nullopt;
  if (!multi) {
    std::vector<const Target*> eligible;
    for (const auto& t : lines)
      if (t.kind == "line" && t.end - t.start <= cfg.max_middle_bytes) eligible.push_back(&t);
    if (eligible.empty()) return std::nullopt;
    const auto* t = eligible[rng.index(eligible.size())];
    return make_sample(file, Strategy::random_single_line, t->start, t->end, Json{{"lines", 1}});
  }
  auto k = static_cast<std::size_t>(
      rng.between(static_cast<std::int64_t>(cfg.multi_line_min), static_cast<std::int64_t>(cfg.multi_line_max)));
  k = std::min(k, lines.size());
  if (k < cfg.multi_line_min) return std::nullopt;
  // starts whose block holds a non-blank line and fits the byte cap
  std::vector<std::size_t> nonblank_prefix(lines.size() + 1, 0);
  for (std::size_t i = 0; i < lines.size(); ++i) nonblank_prefix[i + 1] = nonblank_prefix[i] + (lines[i].kind == "line");
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + k <= lines.size(); ++s) {
    if (nonblank_prefix[s + k] == nonblank_prefix[s]) continue;
    if (lines[s + k - 1].end - lines[s].start > cfg.max_middle_bytes) continue;
    starts.push_back(s);
  }
  if (starts.empty()) return std::nullopt;
  auto s = starts[rng.index(starts.size())];
  return make_sample(file, Strategy::random_multi_line, lines[s].start, lines[s + k - 1].end,
                     Json{{"lines", k}});
}

std::optional<FimSample> pick(const SourceFile& file, Strategy s, const Targets& ts, Rng& rng, const char* key) {
  if (ts.empty()) return std::nullopt;
  const auto& t = ts[rng.index(ts.size())];
  return make_sample(file, s, t.start, t.end, meta_for(t, key));
}

FimSample function_sample(const SourceFile& file, const FunctionTarget& ft) {
  return make_sample(file, Strategy::function_body, ft.target.start, ft.target.end,
                     Json{{"node_kind", ft.target.kind}, {"function", ft.name}, {"doc_lines", ft.doc_lines}});
}

// Per-file candidate lists for every strategy, computed once.
struct FilePlan {
  std::array<Targets, kAllStrategies.size()> targets;
  std::vector<FunctionTarget> functions;
};

Targets collect(Strategy s, const SyntaxTree& tree, const SourceFile& file, const SynthesisConfig& cfg) {
  switch (s) {
    case Strategy::random_intra_line: return intra_line_targets(file.content);
    case Strategy::syntax_token_trigger: return trigger_targets(&tree, file.content, cfg);
    case Strategy::parentheses_fragment: return paren_targets(tree, cfg);
    case Strategy::post_comment_block: return post_comment_targets(tree, cfg);
    case Strategy::random_single_line:
    case Strategy::random_multi_line: return line_targets(file.content);
    case Strategy::function_body: return {};
    default: return ast_targets(tree, s, cfg);
  }
}

std::optional<FimSample> realize(Strategy s, const SourceFile& file, const FilePlan& plan, Rng& rng,
                                 const SynthesisConfig& cfg) {
  const auto& ts = plan.targets[static_cast<std::size_t>(s)];
  switch (s) {
    case Strategy::random_intra_line: return realize_intra_random(file, ts, rng);
    case Strategy::syntax_token_trigger: return pick(file, s, ts, rng, "trigger");
    case Strategy::random_single_line: return realize_lines(file, false, ts, rng, cfg);
    case Strategy::random_multi_line: return realize_lines(file, true, ts, rng, cfg);
    case Strategy::function_body:
      if (plan.functions.empty()) return std::nullopt;
      return function_sample(file, plan.functions[rng.index(plan.functions.size())]);
    default: return pick(file, s, ts, rng, "node_kind");
  }
}

bool usable(Strategy s, const FilePlan& plan) {
  const auto& ts = plan.targets[static_cast<std::size_t>(s)];
  if (s == Strategy::random_single_line) return line_targets_usable(ts, false);
  if (s == Strategy::random_multi_line) return line_targets_usable(ts, true);
  if (s == Strategy::function_body) return !plan.functions.empty();
  return !ts.empty();
}

}  // namespace

FimSample make_sample(const SourceFile& file, Strategy strategy, std::size_t start, std::size_t end, Json meta) {
  FimSample s;
  s.repo_id = file.repo_id;
  s.path = file.path;
  s.language = file.language;
  s.strategy = strategy;
  s.prefix = file.content.substr(0, start);
  s.middle = file.content.substr(start, end - start);
  s.suffix = file.content.substr(end);
  s.id = sample_id(s.repo_id, s.path, s.prefix, s.middle, s.suffix);
  s.meta = Json{{"middle_start", start}, {"middle_end", end}};
  for (auto& [k, v] : meta.items()) s.meta[k] = v;
  return s;
}

std::optional<FimSample> synthesize_ast_sample(const SyntaxTree& tree, const SourceFile& file, Strategy strategy,
                                               Rng& rng, const SynthesisConfig& config) {
  if (!is_ast_strategy(strategy)) throw Error("not an AST strategy: " + std::string(to_string(strategy)));
  return pick(file, strategy, ast_targets(tree, strategy, config), rng, "node_kind");
}

std::optional<FimSample> synthesize_intra_line(const SourceFile& file, IntraLineMode mode, Rng& rng,
                                               const SyntaxTree* tree, const SynthesisConfig& config) {
  if (mode == IntraLineMode::random_position) return realize_intra_random(file, intra_line_targets(file.content), rng);
  return pick(file, Strategy::syntax_token_trigger, trigger_targets(tree, file.content, config), rng, "trigger");
}

std::optional<FimSample> synthesize_parenthesized(const SyntaxTree& tree, const SourceFile& file, Rng& rng,
                                                  const SynthesisConfig& config) {
  return pick(file, Strategy::parentheses_fragment, paren_targets(tree, config), rng, "node_kind");
}

std::optional<FimSample> synthesize_post_comment(const SyntaxTree& tree, const SourceFile& file, Rng& rng,
                                                 const SynthesisConfig& config) {
  return pick(file, Strategy::post_comment_block, post_comment_targets(tree, config), rng, "node_kind");
}

std::optional<FimSample> synthesize_random_lines(const SourceFile& file, bool multi, Rng& rng,
                                                 const SynthesisConfig& config) {
  return realize_lines(file, multi, line_targets(file.content), rng, config);
}

std::vector<FimSample> synthesize_function_sample(const SyntaxTree& tree, const SourceFile& file) {
  std::vector<FimSample> out;
  for (const auto& ft : function_targets(tree)) out.push_back(function_sample(file, ft));
  return out;
}

std::optional<FimSample> synthesize_with(Strategy strategy, const SyntaxTree& tree, const SourceFile& file, Rng& rng,
                                         const SynthesisConfig& config) {
  FilePlan plan;
  if (strategy == Strategy::function_body) plan.functions = function_targets(tree);
  else plan.targets[static_cast<std::size_t>(strategy)] = collect(strategy, tree, file, config);
  return realize(strategy, file, plan, rng, config);
}

std::vector<FimSample> synthesize_corpus(const RepoIndex& index, const CorpusSynthesisConfig& config,
                                         CorpusSynthesisStats* stats_out) {
  CorpusSynthesisStats stats;
  if (config.budget > 0 && !(config.weights.total() > 0)) throw ConfigError("all strategy weights are zero");

  const auto& files = index.files;
  std::vector<SyntaxTree> trees(files.size());
  std::vector<FilePlan> plans(files.size());
  parallel_for(files.size(), config.jobs, [&](std::size_t i) {
    trees[i] = parse(files[i]);
    for (auto s : kAllStrategies) {
      if (s == Strategy::function_body) continue;
      if (config.weights.weight(s) > 0) plans[i].targets[static_cast<std::size_t>(s)] = collect(s, trees[i], files[i], config.synthesis);
    }
    if (config.function_samples || config.weights.weight(Strategy::function_body) > 0)
      plans[i].functions = function_targets(trees[i]);
  });

  StrategyWeights effective;
  std::array<std::vector<std::size_t>, kAllStrategies.size()> eligible;
  for (auto s : kAllStrategies) {
    double w = config.weights.weight(s);
    if (w <= 0) continue;
    auto& el = eligible[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < files.size(); ++i)
      if (usable(s, plans[i])) el.push_back(i);
    if (el.empty()) {
      stats.disabled.push_back(s);
      continue;
    }
    effective.set(s, w);
  }
  if (!stats.disabled.empty())
    spdlog::info("synthesize: {} strategies have no eligible file; weights renormalized", stats.disabled.size());

  std::vector<FimSample> out;
  std::unordered_set<std::string> seen;
  if (config.budget > 0 && effective.total() > 0) {
    std::uint64_t next_slot = 0;
    while (out.size() < config.budget) {
      const std::size_t batch = std::max<std::size_t>(64, (config.budget - out.size()) * 5 / 4);
      std::vector<std::optional<FimSample>> results(batch);
      parallel_for(batch, config.jobs, [&](std::size_t b) {
        Rng rng(Rng::derive(config.seed, next_slot + b));
        Strategy s = draw_strategy(effective, rng);
        const auto& el = eligible[static_cast<std::size_t>(s)];
        for (std::size_t attempt = 0; attempt <= config.retries; ++attempt) {
          std::size_t fi = el[rng.index(el.size())];
          if (auto smp = realize(s, files[fi], plans[fi], rng, config.synthesis)) {
            results[b] = std::move(smp);
            return;
          }
        }
      });
      next_slot += batch;
      std::size_t fresh = 0;
      for (auto& r : results) {
        if (out.size() >= config.budget) break;
        ++stats.slots;
        if (!r) {
          ++stats.empty_slots;
          continue;
        }
        if (!seen.insert(r->id).second) {
          ++stats.duplicates;
          continue;
        }
        ++stats.per_strategy[r->strategy];
        out.push_back(std::move(*r));
        ++fresh;
      }
      if (fresh == 0) {
        spdlog::warn("synthesize: corpus exhausted at {} of {} samples", out.size(), config.budget);
        break;
      }
    }
  }

  if (config.function_samples) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      for (const auto& ft : plans[i].functions) {
        auto smp = function_sample(files[i], ft);
        if (!seen.insert(smp.id).second) continue;
        ++stats.per_strategy[Strategy::function_body];
        out.push_back(std::move(smp));
      }
    }
  }
  if (stats_out) *stats_out = std::move(stats);
  return out;
}

}  // namespace fimforge
