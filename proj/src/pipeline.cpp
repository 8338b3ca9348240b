#include "fimforge/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

#include "fimforge/artifacts.hpp"
#include "fimforge/hashing.hpp"
#include "fimforge/jsonl.hpp"
#include "fimforge/parallel.hpp"
#include "fimforge/text.hpp"

namespace fs = std::filesystem;

namespace fimforge {

namespace {

// artifact names
constexpr const char* kRepoIndex = "repo_index.jsonl";
constexpr const char* kCorpus = "corpus.jsonl";
constexpr const char* kImports = "imports.jsonl";
constexpr const char* kFilterReport = "filter_report.json";
constexpr const char* kSamples = "samples.jsonl";
constexpr const char* kSynthesisStats = "synthesis_stats.json";
constexpr const char* kContextSamples = "samples_context.jsonl";
constexpr const char* kScores = "ppl_scores.jsonl";
constexpr const char* kFilteredSamples = "samples_filtered.jsonl";
constexpr const char* kPplReport = "ppl_report.json";
constexpr const char* kCandidates = "candidates.jsonl";
constexpr const char* kPairs = "pairs.jsonl";
constexpr const char* kCurriculum = "curriculum.jsonl";
constexpr const char* kEvalReport = "eval_report.json";
constexpr const char* kEvalMarkdown = "eval_report.md";
constexpr const char* kReport = "report.md";

// rng stream tags under the master seed
constexpr std::uint64_t kSynthesisStream = 1;
constexpr std::uint64_t kPairsStream = 2;

using Outputs = std::vector<std::pair<std::string, std::string>>;
using InputHashes = std::map<std::string, std::string>;

class RunLock {
 public:
  explicit RunLock(const fs::path& dir) {
    auto path = dir / ".lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw RunDirLocked("run directory " + dir.string() + " is locked by another stage");
    }
  }
  ~RunLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

std::string file_hash(const fs::path& p) { return sha256_file(p); }

// Hash of the config sections a stage depends on, key order independent.
std::string config_hash(const std::string& stage, const PipelineConfig& cfg, std::initializer_list<const char*> sections,
                        bool seeded, std::initializer_list<std::optional<fs::path>> files = {}) {
  nlohmann::json h;
  h["stage"] = stage;
  h["tool_version"] = kToolVersion;
  for (const char* s : sections) {
    auto it = cfg.raw.find(s);
    h["sections"][s] = it == cfg.raw.end() ? nlohmann::json(nullptr) : nlohmann::json::parse(it->dump());
  }
  if (seeded) h["master_seed"] = cfg.master_seed;
  for (const auto& f : files)
    if (f) h["files"].push_back(file_hash(*f));
  return sha256_hex(h.dump());
}

fs::path require(const fs::path& run_dir, const char* name) {
  auto p = run_dir / name;
  if (!fs::exists(p)) throw MissingStageInput("missing stage input: " + std::string(name));
  return p;
}

// Most processed sample artifact present.
fs::path sample_source(const fs::path& run_dir, bool allow_filtered) {
  if (allow_filtered && fs::exists(run_dir / kFilteredSamples)) return run_dir / kFilteredSamples;
  if (fs::exists(run_dir / kContextSamples)) return run_dir / kContextSamples;
  return require(run_dir, kSamples);
}

std::shared_ptr<Endpoint> cached_endpoint(const PipelineConfig& cfg, const RunOptions& opt, std::shared_ptr<Endpoint> inner,
                                          const char* url_var, const char* key_var) {
  if (!inner) {
    auto settings = endpoint_settings_from_env(url_var, key_var);
    if (!settings.url.empty()) inner = std::make_shared<HttpEndpoint>(settings);
  }
  auto dir = cfg.cache_dir ? *cfg.cache_dir : opt.run_dir / "cache";
  return std::make_shared<CachingEndpoint>(dir, std::move(inner));
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string pct(std::size_t part, std::size_t whole) {
  if (whole == 0) return "0.0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * static_cast<double>(part) / static_cast<double>(whole));
  return buf;
}

// ---------------------------------------------------------------------------

struct Stage {
  virtual ~Stage() = default;
  virtual InputHashes inputs() = 0;
  virtual std::string config() = 0;
  virtual std::vector<std::string> output_names() = 0;
  virtual Outputs run() = 0;
};

struct StageEnv {
  const PipelineConfig& cfg;
  const RunOptions& opt;
  unsigned jobs;
};

class IngestStage : public Stage {
 public:
  explicit IngestStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    if (env_.cfg.repos.empty()) throw ConfigError("config: paths.repos is empty");
    InputHashes h;
    for (const auto& repo : env_.cfg.repos) {
      IngestConfig ic = env_.cfg.ingest;
      ic.repo_id = repo.id;
      ic.min_stars = repo.min_stars;
      ic.jobs = env_.jobs;
      auto result = ingest_repo(repo.root, ic, env_.cfg.rules);
      // tree hash: everything the scan saw, by path
      std::vector<std::string> rows;
      for (const auto& f : result.scanned) rows.push_back(f.path + '\0' + sha256_hex(f.content));
      for (const auto& s : result.index.skipped) rows.push_back(s.path + '\0' + s.sha256.value_or(s.reason));
      std::sort(rows.begin(), rows.end());
      std::string joined;
      for (const auto& r : rows) joined += r + '\n';
      h["repo:" + repo.id] = sha256_hex(joined);
      results_.push_back(std::move(result));
    }
    return h;
  }

  std::string config() override {
    return config_hash("ingest", env_.cfg, {"ingest", "paths"}, false, {env_.cfg.rules_file});
  }

  std::vector<std::string> output_names() override { return {kRepoIndex, kCorpus, kImports, kFilterReport}; }

  Outputs run() override {
    std::string index, corpus, imports;
    Json reports = Json::array();
    for (const auto& r : results_) {
      index += repo_index_jsonl(r);
      corpus += corpus_jsonl(r.index);
      imports += imports_jsonl(r.index);
      reports.push_back(filter_report_json(r.index.repo_id, r.report));
      spdlog::info("ingest {}: {} files scanned, {} retained, {} import edges", r.index.repo_id, r.report.ingested,
                   r.report.retained, r.index.import_edges.size());
    }
    return {{kRepoIndex, index}, {kCorpus, corpus}, {kImports, imports}, {kFilterReport, pretty(Json{{"repos", reports}})}};
  }

 private:
  StageEnv env_;
  std::vector<IngestResult> results_;
};

/// Splits `budget` across repos in proportion to their file counts (largest remainder).
std::vector<std::size_t> split_budget(std::size_t budget, const std::vector<std::size_t>& sizes) {
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  std::vector<std::size_t> out(sizes.size(), 0);
  if (total == 0) return out;
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t given = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    double exact = static_cast<double>(budget) * static_cast<double>(sizes[i]) / static_cast<double>(total);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    given += out[i];
    rema.push_back({exact - std::floor(exact), i});
  }
  std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; given < budget && k < rema.size(); ++k, ++given) ++out[rema[k].second];
  return out;
}

class SynthesizeStage : public Stage {
 public:
  explicit SynthesizeStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    corpus_ = require(env_.opt.run_dir, kCorpus);
    imports_ = require(env_.opt.run_dir, kImports);
    return {{kCorpus, file_hash(corpus_)}, {kImports, file_hash(imports_)}};
  }

  std::string config() override { return config_hash("synthesize", env_.cfg, {"weights", "synthesize"}, true); }

  std::vector<std::string> output_names() override { return {kSamples, kSynthesisStats}; }

  Outputs run() override {
    auto indexes = load_indexes(corpus_, imports_);
    std::vector<std::size_t> sizes;
    for (const auto& [id, idx] : indexes) sizes.push_back(idx.files.size());
    auto budgets = split_budget(env_.cfg.budget, sizes);

    std::vector<FimSample> all;
    Json stats = Json::array();
    std::size_t i = 0;
    for (const auto& [id, idx] : indexes) {
      CorpusSynthesisConfig sc;
      sc.budget = budgets[i];
      sc.weights = env_.cfg.weights;
      sc.seed = Rng::derive(Rng::derive(env_.cfg.master_seed, kSynthesisStream), i);
      sc.jobs = env_.jobs;
      sc.retries = env_.cfg.retries;
      sc.function_samples = env_.cfg.function_samples;
      sc.synthesis = env_.cfg.synthesis;
      CorpusSynthesisStats st;
      auto samples = synthesize_corpus(idx, sc, &st);
      Json per = Json::object();
      for (const auto& [s, n] : st.per_strategy) per[std::string(to_string(s))] = n;
      Json disabled = Json::array();
      for (auto s : st.disabled) disabled.push_back(to_string(s));
      stats.push_back(Json{{"repo_id", id},
                           {"budget", sc.budget},
                           {"samples", samples.size()},
                           {"slots", st.slots},
                           {"empty_slots", st.empty_slots},
                           {"duplicates", st.duplicates},
                           {"per_strategy", per},
                           {"disabled_strategies", disabled}});
      spdlog::info("synthesize {}: {} samples", id, samples.size());
      for (auto& s : samples) all.push_back(std::move(s));
      ++i;
    }
    return {{kSamples, samples_jsonl(all)}, {kSynthesisStats, pretty(Json{{"repos", stats}})}};
  }

 private:
  StageEnv env_;
  fs::path corpus_, imports_;
};

class ContextStage : public Stage {
 public:
  explicit ContextStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    samples_ = require(env_.opt.run_dir, kSamples);
    corpus_ = require(env_.opt.run_dir, kCorpus);
    imports_ = require(env_.opt.run_dir, kImports);
    return {{kSamples, file_hash(samples_)}, {kCorpus, file_hash(corpus_)}, {kImports, file_hash(imports_)}};
  }

  std::string config() override { return config_hash("context", env_.cfg, {"context"}, false); }

  std::vector<std::string> output_names() override { return {kContextSamples}; }

  Outputs run() override {
    auto indexes = load_indexes(corpus_, imports_);
    auto samples = load_samples(samples_);
    // group by repository, keeping file order for the output
    std::map<std::string, std::vector<std::size_t>> by_repo;
    for (std::size_t i = 0; i < samples.size(); ++i) by_repo[samples[i].repo_id].push_back(i);
    for (const auto& [repo, positions] : by_repo) {
      auto it = indexes.find(repo);
      if (it == indexes.end()) throw Error("samples reference unknown repository " + repo);
      std::vector<FimSample> group;
      for (auto p : positions) group.push_back(std::move(samples[p]));
      attach_context(group, it->second, env_.cfg.context, env_.jobs);
      for (std::size_t k = 0; k < positions.size(); ++k) samples[positions[k]] = std::move(group[k]);
    }
    spdlog::info("context: {} samples", samples.size());
    return {{kContextSamples, samples_jsonl(samples)}};
  }

 private:
  StageEnv env_;
  fs::path samples_, corpus_, imports_;
};

Json cutoff_json(const CutoffSpec& s) {
  Json j{{"mode", to_string(s.mode)}};
  if (s.mode == CutoffMode::lognormal_sigma)
    j["sigma_k"] = s.sigma_k;
  else {
    j["q_low"] = s.q_low;
    j["q_high"] = s.q_high;
  }
  return j;
}

class FilterStage : public Stage {
 public:
  explicit FilterStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    source_ = sample_source(env_.opt.run_dir, false);
    return {{source_.filename().string(), file_hash(source_)}};
  }

  std::string config() override {
    return config_hash("filter", env_.cfg, {"filter"}, false, {env_.cfg.profiles_file});
  }

  std::vector<std::string> output_names() override { return {kScores, kFilteredSamples, kPplReport}; }

  Outputs run() override {
    auto samples = load_samples(source_);
    auto endpoint = cached_endpoint(env_.cfg, env_.opt, env_.opt.scorer, kScorerUrlVar, kScorerKeyVar);
    EndpointScorer scorer(*endpoint);
    auto report = score_corpus(samples, scorer, env_.cfg.scoring);
    auto result = filter_by_perplexity(samples, report.scored, env_.cfg.ppl);

    Json pools = Json::array();
    for (const auto& p : result.pools) {
      Json pj{{"pool", p.pool}, {"spec", cutoff_json(p.spec)}, {"scored", p.scored}, {"kept", p.kept}};
      pj["cutoffs"] = p.cutoffs ? Json{{"low", p.cutoffs->low}, {"high", p.cutoffs->high}} : Json(nullptr);
      pools.push_back(std::move(pj));
    }
    Json failures = Json::array();
    for (const auto& f : report.failures) failures.push_back(Json{{"sample_id", f.sample_id}, {"reason", f.reason}});
    Json summary{{"input", source_.filename().string()},
                 {"samples", samples.size()},
                 {"kept", result.kept.size()},
                 {"unscored", result.unscored},
                 {"pools", pools},
                 {"failures", failures}};
    spdlog::info("filter: kept {} of {} samples ({} unscored)", result.kept.size(), samples.size(), result.unscored);
    return {{kScores, scores_jsonl(report.scored)},
            {kFilteredSamples, samples_jsonl(result.kept)},
            {kPplReport, pretty(summary)}};
  }

 private:
  StageEnv env_;
  fs::path source_;
};

class PairsStage : public Stage {
 public:
  explicit PairsStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    source_ = sample_source(env_.opt.run_dir, true);
    return {{source_.filename().string(), file_hash(source_)}};
  }

  std::string config() override {
    return config_hash("pairs", env_.cfg, {"pairs"}, true, {env_.cfg.profiles_file});
  }

  std::vector<std::string> output_names() override { return {kCandidates, kPairs}; }

  Outputs run() override {
    auto samples = load_samples(source_);
    auto endpoint = cached_endpoint(env_.cfg, env_.opt, env_.opt.generator, kGeneratorUrlVar, kGeneratorKeyVar);
    EndpointGenerator generator(*endpoint);
    const auto& format = env_.cfg.generation.profile.name;

    std::vector<CandidateBatch> batches(samples.size());
    std::vector<std::optional<CandidateFilterResult>> filtered(samples.size());
    parallel_for(samples.size(), env_.cfg.pairs_in_flight, [&](std::size_t i) {
      if (text::trim(samples[i].middle).empty()) return;
      batches[i] = sample_candidates(samples[i], generator, env_.cfg.generation);
      if (!batches[i].candidates.empty())
        filtered[i] = filter_candidates(samples[i].middle, batches[i].candidates, env_.cfg.candidates);
    });

    std::string candidates;
    std::vector<PreferencePair> pairs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!filtered[i]) continue;
      Json trace = Json::array();
      for (const auto& t : filtered[i]->trace)
        trace.push_back(Json{{"stage", to_string(t.stage)}, {"dropped", t.dropped}});
      candidates += json_line(Json{{"sample_id", samples[i].id},
                                   {"temperature", batches[i].temperature},
                                   {"candidates", batches[i].candidates},
                                   {"trace", trace},
                                   {"negatives", filtered[i]->negatives}});
      for (auto& p : make_rejection_pairs(samples[i], filtered[i]->negatives, format)) pairs.push_back(std::move(p));
    }
    Rng rng(Rng::derive(env_.cfg.master_seed, kPairsStream));
    auto repetition = make_repetition_pairs(samples, rng, env_.cfg.suffix_fraction, env_.cfg.prefix_fraction, format);
    std::size_t rejection_count = pairs.size();
    for (auto& p : repetition) pairs.push_back(std::move(p));

    for (const auto& p : pairs)
      if (auto bad = validate_pair(p)) throw Error("pair " + p.id + " violates its invariant: " + *bad);
    spdlog::info("pairs: {} rejection, {} repetition", rejection_count, pairs.size() - rejection_count);
    return {{kCandidates, candidates}, {kPairs, pairs_jsonl(pairs)}};
  }

 private:
  StageEnv env_;
  fs::path source_;
};

class CurriculumStage : public Stage {
 public:
  explicit CurriculumStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    source_ = sample_source(env_.opt.run_dir, true);
    return {{source_.filename().string(), file_hash(source_)}};
  }

  std::string config() override { return config_hash("curriculum", env_.cfg, {"curriculum"}, false); }

  std::vector<std::string> output_names() override { return {kCurriculum}; }

  Outputs run() override {
    auto samples = load_samples(source_);
    auto entries = build_curriculum(samples, env_.cfg.curriculum, env_.jobs);
    spdlog::info("curriculum: selected {} of {} samples", entries.size(), samples.size());
    return {{kCurriculum, curriculum_jsonl(entries)}};
  }

 private:
  StageEnv env_;
  fs::path source_;
};

class EvalStage : public Stage {
 public:
  explicit EvalStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    if (!env_.cfg.benchmark) throw MissingStageInput("missing stage input: paths.benchmark is not set");
    if (!fs::exists(*env_.cfg.benchmark))
      throw MissingStageInput("missing stage input: " + env_.cfg.benchmark->string());
    return {{"benchmark", file_hash(*env_.cfg.benchmark)}};
  }

  std::string config() override { return config_hash("eval", env_.cfg, {"eval"}, false, {env_.cfg.profiles_file}); }

  std::vector<std::string> output_names() override { return {kEvalReport, kEvalMarkdown}; }

  Outputs run() override {
    std::vector<EvalCase> cases;
    for_each_jsonl(*env_.cfg.benchmark, [&](const Json& j) { cases.push_back(case_from_json(j)); });
    auto endpoint = cached_endpoint(env_.cfg, env_.opt, env_.opt.generator, kGeneratorUrlVar, kGeneratorKeyVar);
    EndpointGenerator generator(*endpoint);
    auto report = run_eval(cases, generator, env_.cfg.eval);
    spdlog::info("eval: {} cases, EM {:.1f}, ES {:.1f}", report.overall.n, 100 * report.overall.em,
                 100 * report.overall.es);
    return {{kEvalReport, pretty(to_json(report))}, {kEvalMarkdown, markdown_report(report)}};
  }

 private:
  StageEnv env_;
};

class ReportStage : public Stage {
 public:
  explicit ReportStage(StageEnv env) : env_(env) {}

  InputHashes inputs() override {
    InputHashes h;
    for (const char* name : {kFilterReport, kSamples, kSynthesisStats, kContextSamples, kPplReport, kPairs,
                             kCurriculum, kEvalReport, kEvalMarkdown}) {
      auto p = env_.opt.run_dir / name;
      if (fs::exists(p)) h[name] = file_hash(p);
    }
    if (h.empty()) throw MissingStageInput("missing stage input: no stage artifacts in run directory");
    present_ = h;
    return h;
  }

  std::string config() override { return config_hash("report", env_.cfg, {}, false); }

  std::vector<std::string> output_names() override { return {kReport}; }

  Outputs run() override {
    const auto& dir = env_.opt.run_dir;
    std::string md = "# Run report\n";

    if (present_.count(kFilterReport)) {
      auto j = Json::parse(read_file(dir / kFilterReport));
      md += "\n## Ingest\n\n| Repository | Files | Retained |\n|---|---:|---:|\n";
      for (const auto& r : j.at("repos"))
        md += "| " + r.at("repo_id").get<std::string>() + " | " + std::to_string(r.at("ingested").get<std::size_t>()) +
              " | " + std::to_string(r.at("retained").get<std::size_t>()) + " |\n";
      md += "\n| Rule | Dropped |\n|---|---:|\n";
      std::map<std::string, std::size_t> drops;
      std::vector<std::string> order;
      for (const auto& r : j.at("repos"))
        for (const auto& d : r.at("drops")) {
          auto id = d.at("rule").get<std::string>();
          if (!drops.count(id)) order.push_back(id);
          drops[id] += d.at("dropped").get<std::size_t>();
        }
      for (const auto& id : order) md += "| " + id + " | " + std::to_string(drops[id]) + " |\n";
    }

    auto sample_table = [&](const char* name, const char* title) {
      std::map<std::string, std::size_t> per;
      std::size_t n = 0, with_bm25 = 0, with_deps = 0;
      for_each_jsonl(dir / name, [&](const Json& j) {
        ++n;
        ++per[j.at("strategy").get<std::string>()];
        bool b = false, d = false;
        for (const auto& c : j.at("context")) (c.at("channel") == "bm25" ? b : d) = true;
        with_bm25 += b;
        with_deps += d;
      });
      md += std::string("\n## ") + title + "\n\n" + std::to_string(n) + " samples";
      if (with_bm25 + with_deps > 0)
        md += "; " + pct(with_bm25, n) + "% with similar-code context, " + pct(with_deps, n) +
              "% with dependency context";
      md += ".\n\n| Strategy | Samples | Share % |\n|---|---:|---:|\n";
      for (auto s : kAllStrategies) {
        auto it = per.find(std::string(to_string(s)));
        if (it != per.end()) md += "| " + it->first + " | " + std::to_string(it->second) + " | " + pct(it->second, n) + " |\n";
      }
    };
    if (present_.count(kContextSamples))
      sample_table(kContextSamples, "Samples");
    else if (present_.count(kSamples))
      sample_table(kSamples, "Samples");

    if (present_.count(kPplReport)) {
      auto j = Json::parse(read_file(dir / kPplReport));
      md += "\n## Perplexity filter\n\nKept " + std::to_string(j.at("kept").get<std::size_t>()) + " of " +
            std::to_string(j.at("samples").get<std::size_t>()) + " samples (" +
            std::to_string(j.at("unscored").get<std::size_t>()) + " unscored).\n\n";
      md += "| Pool | Mode | Low | High | Scored | Kept |\n|---|---|---:|---:|---:|---:|\n";
      for (const auto& p : j.at("pools")) {
        const auto& c = p.at("cutoffs");
        md += "| " + p.at("pool").get<std::string>() + " | " + p.at("spec").at("mode").get<std::string>() + " | " +
              (c.is_null() ? "-" : fmt_double(c.at("low").get<double>())) + " | " +
              (c.is_null() ? "-" : fmt_double(c.at("high").get<double>())) + " | " +
              std::to_string(p.at("scored").get<std::size_t>()) + " | " +
              std::to_string(p.at("kept").get<std::size_t>()) + " |\n";
      }
    }

    if (present_.count(kPairs)) {
      std::map<std::string, std::size_t> kinds;
      std::size_t n = 0;
      for_each_jsonl(dir / kPairs, [&](const Json& j) {
        ++kinds[j.at("pair_kind").get<std::string>()];
        ++n;
      });
      md += "\n## Preference pairs\n\n| Kind | Pairs |\n|---|---:|\n";
      for (auto k : {PairKind::rejection, PairKind::suffix_repetition, PairKind::prefix_repetition})
        md += "| " + std::string(to_string(k)) + " | " + std::to_string(kinds[std::string(to_string(k))]) + " |\n";
      md += "| total | " + std::to_string(n) + " |\n";
    }

    if (present_.count(kCurriculum)) {
      std::map<std::string, std::size_t> pools;
      for_each_jsonl(dir / kCurriculum, [&](const Json& j) { ++pools[j.at("pool").get<std::string>()]; });
      md += "\n## Curriculum\n\n| Pool | Selected |\n|---|---:|\n";
      for (const auto& [p, n] : pools) md += "| " + p + " | " + std::to_string(n) + " |\n";
    }

    if (present_.count(kEvalMarkdown)) md += "\n## Evaluation\n\n" + read_file(dir / kEvalMarkdown);
    return {{kReport, md}};
  }

 private:
  StageEnv env_;
  InputHashes present_;
};

std::unique_ptr<Stage> make_stage(const std::string& name, StageEnv env) {
  if (name == "ingest") return std::make_unique<IngestStage>(env);
  if (name == "synthesize") return std::make_unique<SynthesizeStage>(env);
  if (name == "context") return std::make_unique<ContextStage>(env);
  if (name == "filter") return std::make_unique<FilterStage>(env);
  if (name == "pairs") return std::make_unique<PairsStage>(env);
  if (name == "curriculum") return std::make_unique<CurriculumStage>(env);
  if (name == "eval") return std::make_unique<EvalStage>(env);
  if (name == "report") return std::make_unique<ReportStage>(env);
  throw ConfigError("unknown stage '" + name + "'");
}

Json manifest_json(const std::string& stage, const std::string& cfg_hash, const InputHashes& inputs,
                   const std::map<std::string, std::string>& outputs) {
  Json in = Json::object(), out = Json::object();
  for (const auto& [k, v] : inputs) in[k] = v;
  for (const auto& [k, v] : outputs) out[k] = v;
  return Json{{"stage", stage}, {"tool_version", kToolVersion}, {"config_hash", cfg_hash}, {"inputs", in},
              {"outputs", out}};
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"ingest", "synthesize", "context", "filter",
                                                 "pairs",  "curriculum", "eval",    "report"};
  return names;
}

StageStatus run_stage(const std::string& name, const PipelineConfig& config, const RunOptions& options) {
  auto stage = make_stage(name, StageEnv{config, options, std::max(1u, options.jobs)});
  std::error_code ec;
  fs::create_directories(options.run_dir, ec);
  if (ec) throw Error("cannot create run directory " + options.run_dir.string() + ": " + ec.message());
  RunLock lock(options.run_dir);

  const auto inputs = stage->inputs();
  const auto cfg_hash = stage->config();
  const auto outputs = stage->output_names();
  const auto manifest_path = options.run_dir / (name + ".manifest.json");

  if (fs::exists(manifest_path)) {
    Json old;
    try {
      old = Json::parse(read_file(manifest_path));
    } catch (const Json::exception&) {
      old = Json::object();
    }
    bool same = old.value("config_hash", "") == cfg_hash && old.value("tool_version", "") == kToolVersion &&
                old.contains("inputs") && old["inputs"] == manifest_json(name, cfg_hash, inputs, {})["inputs"];
    bool outputs_intact = old.contains("outputs");
    for (const auto& o : outputs) {
      auto p = options.run_dir / o;
      outputs_intact = outputs_intact && fs::exists(p) && old["outputs"].value(o, "") == file_hash(p);
    }
    if (same && outputs_intact) {
      spdlog::info("{}: up to date", name);
      return StageStatus::up_to_date;
    }
    if (!options.force)
      throw OverwriteRefused(name + ": outputs exist from different inputs or config; rerun with --force to replace them");
  }

  auto produced = stage->run();
  std::map<std::string, std::string> hashes;
  for (const auto& [file, data] : produced) {
    write_file_atomic(options.run_dir / file, data);
    hashes[file] = sha256_hex(data);
  }
  write_file_atomic(manifest_path, pretty(manifest_json(name, cfg_hash, inputs, hashes)));
  return StageStatus::ran;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const MissingStageInput*>(&e)) return 2;
  if (dynamic_cast<const OverwriteRefused*>(&e)) return 3;
  if (dynamic_cast<const RunDirLocked*>(&e)) return 4;
  return 1;
}

}  // namespace fimforge
