#include <set>
#include <type_traits>

#include "fimforge/jsonl.hpp"
#include "fimforge/pipeline.hpp"

namespace fs = std::filesystem;

namespace fimforge {

namespace {

// Reads typed keys from one config object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const Json& parent, std::string name) : name_(std::move(name)) {
    auto it = parent.find(name_);
    if (it == parent.end() || it->is_null()) return;
    if (!it->is_object()) throw ConfigError("config: section '" + name_ + "' must be an object");
    j_ = &*it;
  }
  Section(const Json* j, std::string name) : j_(j), name_(std::move(name)) {
    if (j_ && !j_->is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_ && j_->contains(key) && !j_->at(key).is_null();
  }

  const Json& at(const char* key) { return j_->at(key); }

  template <class T>
  void read(const char* key, T& out) {
    if (!has(key)) return;
    const Json& v = j_->at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(key, "a boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
          fail(key, "a nonnegative integer");
        out = v.get<T>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) fail(key, "an integer");
        out = v.get<T>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail(key, "a number");
        out = v.get<T>();
      } else {
        out = v.get<T>();
      }
    } catch (const Json::exception& e) {
      fail(key, e.what());
    }
  }

  std::string qualified(const char* key) const { return name_ + "." + key; }

  [[noreturn]] void fail(const char* key, const std::string& expected) const {
    throw ConfigError("config: " + qualified(key) + ": expected " + expected);
  }

  void done() const {
    if (!j_) return;
    for (const auto& [k, v] : j_->items())
      if (!seen_.count(k)) throw ConfigError("config: unknown key " + name_ + "." + k);
  }

 private:
  const Json* j_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

CutoffSpec read_cutoff(Section& parent, const char* key, CutoffSpec spec) {
  if (!parent.has(key)) return spec;
  Section s(&parent.at(key), parent.qualified(key));
  if (s.has("mode")) {
    std::string mode;
    s.read("mode", mode);
    auto m = cutoff_mode_from_name(mode);
    if (!m) throw ConfigError("config: unknown cutoff mode '" + mode + "'");
    spec.mode = *m;
  }
  s.read("sigma_k", spec.sigma_k);
  s.read("q_low", spec.q_low);
  s.read("q_high", spec.q_high);
  s.done();
  spec.validate();
  return spec;
}

FormatProfile lookup_profile(const std::string& name, const std::vector<FormatProfile>& custom) {
  for (const auto& p : custom)
    if (p.name == name) return p;
  auto it = builtin_profiles().find(name);
  if (it == builtin_profiles().end()) throw ConfigError("config: unknown format profile '" + name + "'");
  return it->second;
}

void check_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("config: ") + what + " must lie in [0, 1]");
}

}  // namespace

PipelineConfig parse_pipeline_config(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  PipelineConfig cfg;
  Section top(&j, "config");

  top.read("master_seed", cfg.master_seed);

  std::vector<FormatProfile> custom_profiles;
  {
    Section paths(j, "paths");
    top.has("paths");
    if (paths.has("repos")) {
      const Json& repos = paths.at("repos");
      if (!repos.is_array()) paths.fail("repos", "an array");
      std::set<std::string> ids;
      for (const auto& r : repos) {
        RepoSpec spec;
        if (r.is_string()) {
          spec.root = resolve(base_dir, r.get<std::string>());
        } else {
          Section rs(&r, "paths.repos[]");
          std::string root;
          rs.read("path", root);
          if (root.empty()) rs.fail("path", "a directory");
          spec.root = resolve(base_dir, root);
          rs.read("id", spec.id);
          int stars = 0;
          if (rs.has("min_stars")) {
            rs.read("min_stars", stars);
            spec.min_stars = stars;
          }
          rs.done();
        }
        spec.root = spec.root.lexically_normal();
        if (spec.id.empty()) {
          auto trimmed = spec.root;
          if (!trimmed.has_filename()) trimmed = trimmed.parent_path();
          spec.id = trimmed.filename().string();
        }
        if (!ids.insert(spec.id).second) throw ConfigError("config: duplicate repository id '" + spec.id + "'");
        cfg.repos.push_back(std::move(spec));
      }
    }
    std::string p;
    if (paths.has("rules")) { paths.read("rules", p); cfg.rules_file = resolve(base_dir, p); }
    if (paths.has("profiles")) { paths.read("profiles", p); cfg.profiles_file = resolve(base_dir, p); }
    if (paths.has("cache")) { paths.read("cache", p); cfg.cache_dir = resolve(base_dir, p); }
    if (paths.has("benchmark")) { paths.read("benchmark", p); cfg.benchmark = resolve(base_dir, p); }
    paths.done();
  }
  if (cfg.rules_file) cfg.rules = load_rules(read_file(*cfg.rules_file));
  if (cfg.profiles_file) custom_profiles = load_profiles(read_file(*cfg.profiles_file));

  {
    Section s(j, "ingest");
    top.has("ingest");
    s.read("max_file_bytes", cfg.ingest.max_file_bytes);
    s.read("skip_dirs", cfg.ingest.skip_dirs);
    if (s.has("extensions")) {
      const Json& ext = s.at("extensions");
      if (!ext.is_object()) s.fail("extensions", "an object");
      for (const auto& [e, lang] : ext.items()) {
        auto l = lang.is_string() ? language_from_name(lang.get<std::string>()) : std::nullopt;
        if (!l) throw ConfigError("config: extension " + e + " maps to an unknown language");
        cfg.ingest.extensions[e] = *l;
      }
    }
    s.done();
  }

  {
    Section s(j, "weights");
    top.has("weights");
    if (const auto it = j.find("weights"); it != j.end() && it->is_object()) {
      for (const auto& [name, w] : it->items()) {
        auto strategy = strategy_from_name(name);
        if (!strategy) throw ConfigError("config: unknown strategy '" + name + "'");
        s.has(name.c_str());
        if (!w.is_number() || w.get<double>() < 0) throw ConfigError("config: weights." + name + " must be >= 0");
        cfg.weights.set(*strategy, w.get<double>());
      }
    }
    s.done();
    if (!(cfg.weights.total() > 0)) throw ConfigError("config: all strategy weights are zero");
  }

  {
    Section s(j, "synthesize");
    top.has("synthesize");
    s.read("budget", cfg.budget);
    s.read("function_samples", cfg.function_samples);
    s.read("retries", cfg.retries);
    s.read("min_ast_bytes", cfg.synthesis.ast_bounds.min_bytes);
    s.read("max_ast_bytes", cfg.synthesis.ast_bounds.max_bytes);
    s.read("max_middle_bytes", cfg.synthesis.max_middle_bytes);
    s.read("multi_line_min", cfg.synthesis.multi_line_min);
    s.read("multi_line_max", cfg.synthesis.multi_line_max);
    s.read("triggers", cfg.synthesis.triggers);
    s.done();
    if (cfg.synthesis.multi_line_min < 2 || cfg.synthesis.multi_line_min > cfg.synthesis.multi_line_max)
      throw ConfigError("config: synthesize.multi_line_min must be >= 2 and <= multi_line_max");
    if (cfg.synthesis.ast_bounds.min_bytes > cfg.synthesis.ast_bounds.max_bytes)
      throw ConfigError("config: synthesize.min_ast_bytes exceeds max_ast_bytes");
  }

  {
    Section s(j, "context");
    top.has("context");
    s.read("adjacent_lines", cfg.context.adjacent_lines);
    s.read("k1", cfg.context.k1);
    s.read("b", cfg.context.b);
    s.read("bm25_budget", cfg.context.bm25_budget);
    s.read("dependency_budget", cfg.context.dependency_budget);
    s.read("k_max", cfg.context.k_max);
    s.read("bm25", cfg.context.use_bm25);
    s.read("dependencies", cfg.context.use_dependencies);
    s.done();
    if (cfg.context.k1 < 0 || cfg.context.b < 0 || cfg.context.b > 1)
      throw ConfigError("config: context.k1 must be >= 0 and context.b in [0, 1]");
  }

  {
    Section s(j, "filter");
    top.has("filter");
    std::string profile = "psm";
    s.read("profile", profile);
    cfg.scoring.profile = lookup_profile(profile, custom_profiles);
    s.read("intra_budget", cfg.scoring.intra_budget);
    s.read("cross_budget", cfg.scoring.cross_budget);
    s.read("include_context", cfg.scoring.include_context);
    if (s.has("scope")) {
      std::string scope;
      s.read("scope", scope);
      if (scope == "middle_only") cfg.scoring.scope = PplScope::middle_only;
      else if (scope == "full_sequence") cfg.scoring.scope = PplScope::full_sequence;
      else throw ConfigError("config: filter.scope must be middle_only or full_sequence");
    }
    s.read("max_failure_fraction", cfg.scoring.max_failure_fraction);
    s.read("in_flight", cfg.scoring.in_flight);
    cfg.ppl.infill = read_cutoff(s, "infill", cfg.ppl.infill);
    cfg.ppl.function = read_cutoff(s, "function", cfg.ppl.function);
    s.done();
    check_fraction(cfg.scoring.max_failure_fraction, "filter.max_failure_fraction");
    if (cfg.scoring.in_flight == 0) throw ConfigError("config: filter.in_flight must be positive");
  }

  {
    Section s(j, "pairs");
    top.has("pairs");
    std::string profile = "psm";
    s.read("profile", profile);
    cfg.generation.profile = lookup_profile(profile, custom_profiles);
    s.read("n", cfg.generation.n);
    s.read("temperature", cfg.generation.temperature);
    s.read("max_tokens", cfg.generation.max_tokens);
    s.read("intra_budget", cfg.generation.intra_budget);
    s.read("cross_budget", cfg.generation.cross_budget);
    s.read("bleu_threshold", cfg.candidates.bleu_threshold);
    s.read("keep", cfg.candidates.keep);
    if (s.has("order")) {
      std::vector<std::string> names;
      s.read("order", names);
      cfg.candidates.order.clear();
      for (const auto& n : names) {
        std::optional<CandidateStage> st;
        for (auto c : {CandidateStage::dedup, CandidateStage::empty, CandidateStage::contains_ground_truth,
                       CandidateStage::bleu})
          if (to_string(c) == n) st = c;
        if (!st) throw ConfigError("config: unknown candidate filter stage '" + n + "'");
        cfg.candidates.order.push_back(*st);
      }
    }
    s.read("suffix_fraction", cfg.suffix_fraction);
    s.read("prefix_fraction", cfg.prefix_fraction);
    s.read("in_flight", cfg.pairs_in_flight);
    s.done();
    check_fraction(cfg.suffix_fraction, "pairs.suffix_fraction");
    check_fraction(cfg.prefix_fraction, "pairs.prefix_fraction");
    if (cfg.pairs_in_flight == 0) throw ConfigError("config: pairs.in_flight must be positive");
  }

  {
    Section s(j, "curriculum");
    top.has("curriculum");
    s.read("k_fraction", cfg.curriculum.k_fraction);
    if (s.has("scope")) {
      std::string scope;
      s.read("scope", scope);
      auto sc = complexity_scope_from_name(scope);
      if (!sc) throw ConfigError("config: curriculum.scope must be file or middle");
      cfg.curriculum.scope = *sc;
    }
    s.read("per_pool", cfg.curriculum.per_pool);
    s.done();
    check_fraction(cfg.curriculum.k_fraction, "curriculum.k_fraction");
  }

  {
    Section s(j, "eval");
    top.has("eval");
    std::string profile = "psm";
    s.read("profile", profile);
    cfg.eval.profile = lookup_profile(profile, custom_profiles);
    s.read("intra_budget", cfg.eval.intra_budget);
    s.read("cross_budget", cfg.eval.cross_budget);
    s.read("max_tokens", cfg.eval.decoding.max_tokens);
    s.read("temperature", cfg.eval.decoding.temperature);
    s.read("in_flight", cfg.eval.in_flight);
    s.done();
    if (cfg.eval.in_flight == 0) throw ConfigError("config: eval.in_flight must be positive");
  }

  top.done();
  cfg.raw = j;
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
  std::string text;
  try {
    text = read_file(file);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: " + file.string() + ": " + e.what());
  }
  auto base = file.has_parent_path() ? file.parent_path() : fs::path(".");
  return parse_pipeline_config(j, base);
}

}  // namespace fimforge
