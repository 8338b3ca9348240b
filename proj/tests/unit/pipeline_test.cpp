#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <sys/file.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <unistd.h>

#include <cstdio>

#include "fimforge/jsonl.hpp"
#include "fimforge/pipeline.hpp"
#include "support/fake_endpoints.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;

namespace fimforge {
namespace {

using testing::fixture;
using testing::slurp;
using testing::TempDir;
using testing::write_text;

Json base_config(const fs::path& cache) {
  return Json{{"master_seed", 7},
              {"paths",
               {{"repos", {fixture("repos/polyglot").string()}},
                {"cache", cache.string()},
                {"benchmark", fixture("eval/benchmark.jsonl").string()}}},
              {"synthesize", {{"budget", 150}}},
              {"pairs", {{"n", 6}}}};
}

PipelineConfig config_of(const Json& j) { return parse_pipeline_config(j, fs::current_path()); }

RunOptions options_for(const fs::path& run_dir, unsigned jobs = 2) {
  RunOptions o;
  o.run_dir = run_dir;
  o.jobs = jobs;
  o.scorer = std::make_shared<testing::FakeScorer>();
  o.generator = std::make_shared<testing::FakeGenerator>();
  return o;
}

void run_all(const PipelineConfig& cfg, const RunOptions& o) {
  for (const auto& stage : stage_names()) ASSERT_EQ(run_stage(stage, cfg, o), StageStatus::ran) << stage;
}

std::map<std::string, std::string> artifacts(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != ".lock") out[e.path().filename().string()] = slurp(e.path());
  return out;
}

TEST(Pipeline, StageNames) {
  EXPECT_THAT(stage_names(), ::testing::ElementsAre("ingest", "synthesize", "context", "filter", "pairs",
                                                    "curriculum", "eval", "report"));
}

TEST(Pipeline, FullRunThenCacheOnlyRerunIsByteIdentical) {
  TempDir tmp;
  auto cfg = config_of(base_config(tmp / "cache"));
  run_all(cfg, options_for(tmp / "a", 1));

  RunOptions offline;  // responses come from the shared cache only
  offline.run_dir = tmp / "b";
  offline.jobs = 4;
  offline.scorer = nullptr;
  offline.generator = nullptr;
  ::unsetenv(kScorerUrlVar);
  ::unsetenv(kGeneratorUrlVar);
  run_all(cfg, offline);

  auto a = artifacts(tmp / "a"), b = artifacts(tmp / "b");
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, bytes] : a) EXPECT_TRUE(bytes == b.at(name)) << name;
  for (const char* f : {"repo_index.jsonl", "corpus.jsonl", "imports.jsonl", "samples.jsonl", "samples_context.jsonl",
                        "ppl_scores.jsonl", "samples_filtered.jsonl", "pairs.jsonl", "curriculum.jsonl",
                        "eval_report.json", "eval_report.md", "report.md", "pairs.manifest.json"})
    EXPECT_TRUE(a.count(f)) << f;
}

TEST(Pipeline, PairsFileValidates) {
  TempDir tmp;
  auto cfg = config_of(base_config(tmp / "cache"));
  run_all(cfg, options_for(tmp / "run"));
  std::map<std::string, int> per_sample;
  std::size_t repetition = 0;
  for (const auto& j : read_jsonl(tmp / "run/pairs.jsonl")) {
    auto p = pair_from_json(j);
    EXPECT_FALSE(validate_pair(p));
    if (p.kind == PairKind::rejection)
      EXPECT_LE(++per_sample[p.source_sample_id], 3);
    else
      ++repetition;
  }
  EXPECT_FALSE(per_sample.empty());
  EXPECT_GT(repetition, 0u);
}

TEST(Pipeline, RerunIsUpToDateAndChangesNeedForce) {
  TempDir tmp;
  auto j = base_config(tmp / "cache");
  auto o = options_for(tmp / "run");
  ASSERT_EQ(run_stage("ingest", config_of(j), o), StageStatus::ran);
  ASSERT_EQ(run_stage("synthesize", config_of(j), o), StageStatus::ran);
  EXPECT_EQ(run_stage("synthesize", config_of(j), o), StageStatus::up_to_date);

  j["master_seed"] = 8;
  EXPECT_THROW(run_stage("synthesize", config_of(j), o), OverwriteRefused);
  o.force = true;
  EXPECT_EQ(run_stage("synthesize", config_of(j), o), StageStatus::ran);

  // downstream notices its input moved
  o.force = false;
  ASSERT_EQ(run_stage("context", config_of(j), o), StageStatus::ran);
  o.force = true;
  j["master_seed"] = 9;
  ASSERT_EQ(run_stage("synthesize", config_of(j), o), StageStatus::ran);
  o.force = false;
  EXPECT_THROW(run_stage("context", config_of(j), o), OverwriteRefused);
}

TEST(Pipeline, TamperedOutputIsNotUpToDate) {
  TempDir tmp;
  auto cfg = config_of(base_config(tmp / "cache"));
  auto o = options_for(tmp / "run");
  run_stage("ingest", cfg, o);
  write_text(tmp / "run/corpus.jsonl", "");
  EXPECT_THROW(run_stage("ingest", cfg, o), OverwriteRefused);
}

TEST(Pipeline, MissingInput) {
  TempDir tmp;
  auto cfg = config_of(base_config(tmp / "cache"));
  try {
    run_stage("pairs", cfg, options_for(tmp / "run"));
    FAIL();
  } catch (const MissingStageInput& e) {
    EXPECT_EQ(exit_code_for(e), 2);
  }
}

TEST(Pipeline, LockedRunDir) {
  TempDir tmp;
  fs::create_directories(tmp / "run");
  int fd = ::open((tmp / "run/.lock").c_str(), O_CREAT | O_RDWR, 0644);
  ASSERT_GE(fd, 0);
  ASSERT_EQ(::flock(fd, LOCK_EX | LOCK_NB), 0);
  try {
    run_stage("ingest", config_of(base_config(tmp / "cache")), options_for(tmp / "run"));
    ADD_FAILURE() << "expected the lock to be refused";
  } catch (const RunDirLocked& e) {
    EXPECT_EQ(exit_code_for(e), 4);
  }
  ::close(fd);
}

TEST(Pipeline, EmptyRepositoryGivesEmptySamples) {
  TempDir tmp;
  fs::create_directories(tmp / "empty");
  auto j = base_config(tmp / "cache");
  j["paths"]["repos"] = {(tmp / "empty").string()};
  auto cfg = config_of(j);
  auto o = options_for(tmp / "run");
  run_stage("ingest", cfg, o);
  EXPECT_EQ(run_stage("synthesize", cfg, o), StageStatus::ran);
  EXPECT_EQ(slurp(tmp / "run/samples.jsonl"), "");
}

TEST(PipelineConfig, UnknownAndIllTypedKeys) {
  EXPECT_THROW(config_of(Json{{"synthesize", {{"budgett", 3}}}}), ConfigError);
  EXPECT_THROW(config_of(Json{{"bogus", 1}}), ConfigError);
  EXPECT_THROW(config_of(Json{{"synthesize", {{"budget", -3}}}}), ConfigError);
  EXPECT_THROW(config_of(Json{{"context", {{"b", 1.5}}}}), ConfigError);
  EXPECT_THROW(config_of(Json{{"weights", {{"no_such_strategy", 1.0}}}}), ConfigError);
  EXPECT_THROW(config_of(Json{{"filter", {{"profile", "missing"}}}}), ConfigError);
}

TEST(PipelineConfig, ValuesAndRelativePaths) {
  auto cfg = parse_pipeline_config(Json{{"master_seed", 3},
                                        {"paths", {{"repos", {"r1", {{"path", "r2"}, {"id", "second"}}}}}},
                                        {"synthesize", {{"budget", 42}, {"multi_line_max", 6}}},
                                        {"curriculum", {{"k_fraction", 0.5}}}},
                                   "/base");
  EXPECT_EQ(cfg.master_seed, 3u);
  ASSERT_EQ(cfg.repos.size(), 2u);
  EXPECT_EQ(cfg.repos[0].root, fs::path("/base/r1"));
  EXPECT_EQ(cfg.repos[0].id, "r1");
  EXPECT_EQ(cfg.repos[1].id, "second");
  EXPECT_EQ(cfg.budget, 42u);
  EXPECT_EQ(cfg.synthesis.multi_line_max, 6u);
  EXPECT_EQ(cfg.curriculum.k_fraction, 0.5);
}

struct CliResult {
  int code;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  TempDir tmp;
  auto err_file = tmp / "stderr";
  std::string cmd = std::string(FIMFORGE_CLI) + " " + args + " 2>" + err_file.string() + " >/dev/null";
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err_file)};
}

Json last_json_line(const std::string& err) {
  auto lines = err;
  while (!lines.empty() && lines.back() == '\n') lines.pop_back();
  return Json::parse(lines.substr(lines.rfind('\n') + 1));
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  auto cfg_path = tmp / "config.json";
  write_text(cfg_path, base_config(tmp / "cache").dump());
  const std::string common = " --config " + cfg_path.string() + " --run-dir " + (tmp / "run").string();

  EXPECT_EQ(run_cli("--help").code, 0);

  auto missing = run_cli("pairs" + common);
  EXPECT_EQ(missing.code, 2);
  auto j = last_json_line(missing.err);
  EXPECT_EQ(j.at("stage"), "pairs");
  EXPECT_EQ(j.at("code"), 2);
  EXPECT_THAT(j.at("error").get<std::string>(), ::testing::HasSubstr("samples.jsonl"));

  EXPECT_EQ(run_cli("ingest" + common).code, 0);
  EXPECT_EQ(run_cli("ingest" + common).code, 0);  // up to date
  EXPECT_EQ(run_cli("ingest" + common + " --seed 99").code, 0);  // seed does not touch ingest
  EXPECT_EQ(run_cli("synthesize" + common).code, 0);
  EXPECT_EQ(run_cli("synthesize" + common + " --seed 99").code, 3);
  EXPECT_EQ(run_cli("synthesize" + common + " --seed 99 --force").code, 0);

  write_text(tmp / "bad.json", R"({"synthesize": {"budgett": 1}})");
  auto bad = run_cli("ingest --config " + (tmp / "bad.json").string() + " --run-dir " + (tmp / "run2").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_THAT(last_json_line(bad.err).at("error").get<std::string>(), ::testing::HasSubstr("budgett"));

  EXPECT_EQ(run_cli("nonsense").code, 1);
}

}  // namespace
}  // namespace fimforge
