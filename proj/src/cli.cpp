#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <thread>

#include "fimforge/pipeline.hpp"

namespace fimforge {

namespace {

void print_error(const std::string& message, const std::string& stage, int code) {
  Json j{{"error", message}, {"stage", stage}, {"code", code}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"FIM and preference data pipeline"};
  app.require_subcommand(1);

  std::string config_path, run_dir, benchmark, log_level = "info";
  std::vector<std::string> repos;
  std::optional<std::uint64_t> seed;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool force = false;

  for (const auto& name : stage_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " stage");
    sub->add_option("--config", config_path, "pipeline config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--run-dir", run_dir, "directory holding stage artifacts")->required();
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--force", force, "replace outputs produced from different inputs");
    sub->add_option("--log-level", log_level, "trace, debug, info, warn, error, off");
    if (name == "ingest") sub->add_option("--repo", repos, "repository root (added to paths.repos)");
    if (name == "eval") sub->add_option("--benchmark", benchmark, "benchmark JSONL (overrides paths.benchmark)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error(e.what(), "", 1);
    return 1;
  }

  auto logger = spdlog::stderr_color_mt("fimforge");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    PipelineConfig config = config_path.empty() ? parse_pipeline_config(Json::object(), std::filesystem::current_path())
                                                : load_pipeline_config(config_path);
    if (seed) config.master_seed = *seed;
    for (const auto& r : repos) {
      RepoSpec spec;
      spec.root = std::filesystem::absolute(r).lexically_normal();
      auto root = spec.root;
      if (!root.has_filename()) root = root.parent_path();
      spec.id = root.filename().string();
      for (const auto& existing : config.repos)
        if (existing.id == spec.id) throw ConfigError("duplicate repository id '" + spec.id + "'");
      config.repos.push_back(std::move(spec));
      config.raw["paths"]["repos"].push_back(r);
    }
    if (!benchmark.empty()) {
      config.benchmark = std::filesystem::absolute(benchmark);
      config.raw["paths"]["benchmark"] = benchmark;
    }
    RunOptions options;
    options.run_dir = run_dir;
    options.jobs = jobs;
    options.force = force;
    run_stage(stage, config, options);
    return 0;
  } catch (const std::exception& e) {
    int code = exit_code_for(e);
    print_error(e.what(), stage, code);
    return code;
  }
}

}  // namespace fimforge
