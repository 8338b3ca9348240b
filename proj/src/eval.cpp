#include "fimforge/eval.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <map>

#include "fimforge/error.hpp"
#include "fimforge/parallel.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

EvalCase case_from_json(const Json& j) {
  try {
    EvalCase c;
    c.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
    c.language = j.at("language").get<std::string>();
    c.prefix = j.at("prefix").get<std::string>();
    c.suffix = j.at("suffix").get<std::string>();
    c.ground_truth = j.at("ground_truth").get<std::string>();
    if (text::is_blank(c.ground_truth)) throw Error("case " + c.id + " has an empty ground truth");
    for (const auto& s : j.value("context", Json::array())) {
      if (s.is_string()) {
        c.context.push_back({"", ContextChannel::bm25, s.get<std::string>(), std::nullopt, 0});
      } else {
        auto snip = snippet_from_json(s);
        c.context.push_back(std::move(snip));
      }
    }
    c.max_output_tokens = j.value("max_output_tokens", std::size_t{0});
    if (j.contains("format")) {
      auto f = layout_from_name(j["format"].get<std::string>());
      if (!f) throw Error("case " + c.id + ": format must be PSM or SPM");
      c.format = f;
    }
    return c;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed benchmark case: ") + e.what());
  }
}

std::string_view to_string(Repetition r) {
  switch (r) {
    case Repetition::none: return "none";
    case Repetition::prefix_rep: return "prefix_rep";
    case Repetition::suffix_rep: return "suffix_rep";
  }
  return "none";
}

namespace {

std::string em_form(std::string_view s) { return std::string(text::trim(text::normalize_newlines(s))); }

}  // namespace

int exact_match(std::string_view generated, std::string_view ground_truth) {
  return em_form(generated) == em_form(ground_truth) ? 1 : 0;
}

std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  if (a.size() < b.size()) return levenshtein(b, a);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double edit_similarity(std::string_view a, std::string_view b) {
  auto ua = text::decode_utf8(a);
  auto ub = text::decode_utf8(b);
  const auto longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(longest);
}

Repetition classify_repetition(std::string_view generated, std::string_view prefix, std::string_view suffix,
                               std::string_view ground_truth) {
  auto g = text::strip_all_whitespace(text::first_nonblank_line(generated));
  if (g.empty()) return Repetition::none;
  auto t = text::strip_all_whitespace(text::first_nonblank_line(ground_truth));
  auto s = text::strip_all_whitespace(text::first_nonblank_line(suffix));
  auto p = text::strip_all_whitespace(text::last_nonblank_line(prefix));
  if (g == t) return Repetition::none;
  if (!s.empty() && g == s) return Repetition::suffix_rep;
  if (!p.empty() && g == p) return Repetition::prefix_rep;
  return Repetition::none;
}

EvalRecord score_case(const EvalCase& c, std::string generated) {
  EvalRecord r;
  r.case_id = c.id;
  r.language = c.language;
  r.em = exact_match(generated, c.ground_truth);
  r.es = edit_similarity(em_form(generated), em_form(c.ground_truth));
  r.repetition = classify_repetition(generated, c.prefix, c.suffix, c.ground_truth);
  r.generated = std::move(generated);
  return r;
}

EvalReport summarize(std::vector<EvalRecord> records) {
  EvalReport report;
  std::map<std::string, GroupStats> groups;
  auto add = [](GroupStats& g, const EvalRecord& r) {
    ++g.n;
    g.em += r.em;
    g.es += r.es;
    g.prefix_rep += r.repetition == Repetition::prefix_rep;
    g.suffix_rep += r.repetition == Repetition::suffix_rep;
  };
  auto finish = [](GroupStats& g) {
    if (g.n == 0) return;
    const double n = static_cast<double>(g.n);
    g.em /= n;
    g.es /= n;
    g.prefix_rep /= n;
    g.suffix_rep /= n;
  };
  report.overall.name = "overall";
  for (const auto& r : records) {
    auto& g = groups[r.language];
    g.name = r.language;
    add(g, r);
    add(report.overall, r);
    if (r.error) ++report.failures;
  }
  for (auto& [name, g] : groups) {
    finish(g);
    report.per_language.push_back(g);
  }
  finish(report.overall);
  report.records = std::move(records);
  return report;
}

EvalReport run_eval(const std::vector<EvalCase>& cases, Generator& generator, const EvalConfig& config) {
  std::vector<EvalRecord> records(cases.size());
  parallel_for(cases.size(), std::max(1u, config.in_flight), [&](std::size_t i) {
    const auto& c = cases[i];
    auto layout = c.format.value_or(config.profile.layout);
    auto prompt = assemble_prompt({c.prefix, c.suffix, c.context}, config.profile, layout, config.intra_budget,
                                  config.cross_budget);
    auto max_tokens = c.max_output_tokens ? c.max_output_tokens : config.decoding.max_tokens;
    std::string generated;
    std::optional<std::string> error;
    try {
      auto out = generator.generate(prompt, 1, config.decoding.temperature, max_tokens);
      if (out.empty()) throw EndpointError("no completion returned", false);
      generated = std::move(out.front());
    } catch (const EndpointError& e) {
      spdlog::warn("eval case {}: {}", c.id, e.what());
      error = e.what();
    }
    records[i] = score_case(c, std::move(generated));
    records[i].error = std::move(error);
  });
  return summarize(std::move(records));
}

Json to_json(const EvalRecord& r) {
  Json j{{"id", r.case_id},   {"language", r.language}, {"generated", r.generated},
         {"em", r.em},        {"es", r.es},             {"repetition", to_string(r.repetition)}};
  if (r.error) j["error"] = *r.error;
  return j;
}

namespace {

double pct1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return std::stod(buf);
}

Json group_json(const GroupStats& g) {
  return Json{{"language", g.name},
              {"n", g.n},
              {"em", g.em},
              {"es", g.es},
              {"prefix_rep", g.prefix_rep},
              {"suffix_rep", g.suffix_rep},
              {"em_pct", pct1(g.em)},
              {"es_pct", pct1(g.es)},
              {"prefix_rep_pct", pct1(g.prefix_rep)},
              {"suffix_rep_pct", pct1(g.suffix_rep)},
              {"repetition_pct", pct1(g.prefix_rep + g.suffix_rep)}};
}

std::string fmt1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
  return buf;
}

}  // namespace

Json to_json(const EvalReport& report) {
  Json langs = Json::array();
  for (const auto& g : report.per_language) langs.push_back(group_json(g));
  Json records = Json::array();
  for (const auto& r : report.records) records.push_back(to_json(r));
  return Json{{"overall", group_json(report.overall)},
              {"per_language", std::move(langs)},
              {"failures", report.failures},
              {"records", std::move(records)}};
}

std::string markdown_report(const EvalReport& report) {
  std::string md;
  md += "| Language | N | EM | ES |\n|---|---:|---:|---:|\n";
  auto row = [&](const GroupStats& g, const std::string& label) {
    md += "| " + label + " | " + std::to_string(g.n) + " | " + fmt1(g.em) + " | " + fmt1(g.es) + " |\n";
  };
  for (const auto& g : report.per_language) row(g, g.name);
  row(report.overall, "Overall");
  md += "\n| Language | Prefix repetition | Suffix repetition | Total |\n|---|---:|---:|---:|\n";
  auto rep = [&](const GroupStats& g, const std::string& label) {
    md += "| " + label + " | " + fmt1(g.prefix_rep) + " | " + fmt1(g.suffix_rep) + " | " +
          fmt1(g.prefix_rep + g.suffix_rep) + " |\n";
  };
  for (const auto& g : report.per_language) rep(g, g.name);
  rep(report.overall, "Overall");
  return md;
}

}  // namespace fimforge
