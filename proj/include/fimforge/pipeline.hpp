#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fimforge/context.hpp"
#include "fimforge/curriculum.hpp"
#include "fimforge/endpoint.hpp"
#include "fimforge/error.hpp"
#include "fimforge/eval.hpp"
#include "fimforge/ingest.hpp"
#include "fimforge/preference.hpp"
#include "fimforge/quality.hpp"
#include "fimforge/synthesis.hpp"

namespace fimforge {

inline constexpr const char* kToolVersion = "fimforge 0.1.0";

struct RepoSpec {
  std::filesystem::path root;
  std::string id;
  std::optional<int> min_stars;
};

struct PipelineConfig {
  std::uint64_t master_seed = 0;

  // paths, resolved against the config file's directory
  std::vector<RepoSpec> repos;
  std::optional<std::filesystem::path> rules_file;
  std::optional<std::filesystem::path> profiles_file;
  std::optional<std::filesystem::path> cache_dir;  // default: <run-dir>/cache
  std::optional<std::filesystem::path> benchmark;

  IngestConfig ingest;
  RuleSet rules = default_rules();
  StrategyWeights weights = StrategyWeights::defaults();

  std::size_t budget = 1000;
  bool function_samples = true;
  std::size_t retries = 8;
  SynthesisConfig synthesis;

  ContextConfig context;

  ScoringConfig scoring;
  PplFilterConfig ppl;

  GenerationConfig generation;
  CandidateFilterConfig candidates;
  double suffix_fraction = 0.10;
  double prefix_fraction = 0.01;
  unsigned pairs_in_flight = 4;

  CurriculumConfig curriculum;
  EvalConfig eval;

  /// Sections as written, for per-stage config hashes.
  Json raw = Json::object();
};

/// Parses a config document. Unknown keys and ill-typed values throw
/// ConfigError; relative paths resolve against `base_dir`.
PipelineConfig parse_pipeline_config(const Json& j, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& file);

struct RunOptions {
  std::filesystem::path run_dir;
  unsigned jobs = 1;
  bool force = false;
  // Endpoints behind the response cache. Null: read the environment; when
  // that is unset too, only cached responses are served.
  std::shared_ptr<Endpoint> scorer;
  std::shared_ptr<Endpoint> generator;
};

/// Outputs exist from a different config or input state.
class OverwriteRefused : public Error {
 public:
  using Error::Error;
};

/// Another stage holds the run directory.
class RunDirLocked : public Error {
 public:
  using Error::Error;
};

enum class StageStatus { ran, up_to_date };

const std::vector<std::string>& stage_names();

/// Runs one stage under the run-directory lock. Throws MissingStageInput,
/// OverwriteRefused, RunDirLocked, ConfigError or Error.
StageStatus run_stage(const std::string& stage, const PipelineConfig& config, const RunOptions& options);

/// Process exit code for an exception escaping run_stage.
int exit_code_for(const std::exception& e);

/// Command-line entry point: `fimforge <stage> --config F --run-dir D ...`.
int cli_main(int argc, char** argv);

}  // namespace fimforge
