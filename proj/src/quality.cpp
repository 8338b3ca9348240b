#include "fimforge/quality.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "fimforge/parallel.hpp"

namespace fimforge {

namespace {
constexpr double kCountEps = 1e-9;
constexpr double kRelativeSlack = 1e-12;
}  // namespace

double perplexity(const std::vector<double>& logprobs) {
  if (logprobs.empty()) throw Error("perplexity of an empty token sequence");
  double sum = 0;
  for (double lp : logprobs) {
    if (!std::isfinite(lp) || lp > 0) throw Error("not a log-probability: " + std::to_string(lp));
    sum += lp;
  }
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

ScoredSample make_scored(std::string sample_id, const std::vector<double>& logprobs) {
  ScoredSample s;
  s.sample_id = std::move(sample_id);
  s.ppl = perplexity(logprobs);
  s.token_count = logprobs.size();
  for (double lp : logprobs) s.sum_logprob += lp;
  if (!std::isfinite(s.ppl)) throw Error("perplexity overflow");
  return s;
}

std::string_view to_string(CutoffMode m) { return m == CutoffMode::lognormal_sigma ? "lognormal_sigma" : "quantile"; }

std::optional<CutoffMode> cutoff_mode_from_name(std::string_view name) {
  if (name == "lognormal_sigma") return CutoffMode::lognormal_sigma;
  if (name == "quantile") return CutoffMode::quantile;
  return std::nullopt;
}

void CutoffSpec::validate() const {
  if (!(sigma_k > 0)) throw ConfigError("sigma_k must be positive");
  if (!(q_low >= 0 && q_low < q_high && q_high <= 1)) throw ConfigError("need 0 <= q_low < q_high <= 1");
}

Cutoffs fit_lognormal_cutoffs(const std::vector<double>& ppls, double sigma_k) {
  if (ppls.size() < 2) throw Error("log-normal fit needs at least two perplexities");
  if (!(sigma_k > 0)) throw ConfigError("sigma_k must be positive");
  double mu = 0;
  for (double p : ppls) {
    if (!(p > 0)) throw Error("perplexity must be positive");
    mu += std::log(p);
  }
  mu /= static_cast<double>(ppls.size());
  double var = 0;
  for (double p : ppls) var += (std::log(p) - mu) * (std::log(p) - mu);
  const double sigma = std::sqrt(var / static_cast<double>(ppls.size()));
  return {std::exp(mu - sigma_k * sigma), std::exp(mu + sigma_k * sigma)};
}

Cutoffs quantile_cutoffs(const std::vector<double>& ppls, double q_low, double q_high) {
  if (ppls.empty()) throw Error("quantile cutoffs of an empty list");
  CutoffSpec{CutoffMode::quantile, 2.0, q_low, q_high}.validate();
  std::vector<double> sorted = ppls;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const auto last = sorted.size() - 1;
  const auto trim_low = static_cast<std::size_t>(std::max(0.0, std::ceil(q_low * n - kCountEps)));
  const auto trim_high = static_cast<std::size_t>(std::max(0.0, std::ceil((1.0 - q_high) * n - kCountEps)));
  const double low = sorted[std::min(trim_low, last)];
  const double high = sorted[trim_high > last ? 0 : last - trim_high];
  return {low, std::max(low, high)};
}

Cutoffs compute_cutoffs(const std::vector<double>& ppls, const CutoffSpec& spec) {
  spec.validate();
  if (spec.mode == CutoffMode::lognormal_sigma) return fit_lognormal_cutoffs(ppls, spec.sigma_k);
  return quantile_cutoffs(ppls, spec.q_low, spec.q_high);
}

bool within(const Cutoffs& c, double ppl) {
  return ppl >= c.low * (1 - kRelativeSlack) && ppl <= c.high * (1 + kRelativeSlack);
}

ScoreResponse parse_score_response(const Json& j) {
  if (!j.is_object() || !j.contains("logprobs") || !j["logprobs"].is_array())
    throw EndpointError("scorer response lacks a logprobs array", false);
  ScoreResponse r;
  for (const auto& lp : j["logprobs"]) {
    if (!lp.is_number()) throw EndpointError("scorer logprob is not a number", false);
    r.logprobs.push_back(lp.get<double>());
  }
  if (j.contains("tokens")) {
    if (!j["tokens"].is_array()) throw EndpointError("scorer tokens is not an array", false);
    for (const auto& t : j["tokens"]) r.tokens.push_back(t.is_string() ? t.get<std::string>() : t.dump());
    if (r.tokens.size() != r.logprobs.size()) throw EndpointError("scorer tokens/logprobs length mismatch", false);
  }
  if (r.logprobs.empty()) throw EndpointError("scorer returned no tokens", false);
  for (double lp : r.logprobs)
    if (!std::isfinite(lp) || lp > 0) throw EndpointError("scorer returned a positive or non-finite logprob", false);
  return r;
}

ScoreResponse EndpointScorer::score(const std::string& prompt, const std::string& completion) {
  Json request{{"prompt", prompt}, {"completion", completion}, {"echo_logprobs", true}};
  return parse_score_response(call_with_retries(endpoint_, request, retry_));
}

ScoringReport score_corpus(const std::vector<FimSample>& samples, Scorer& scorer, const ScoringConfig& config) {
  std::vector<std::optional<ScoredSample>> scored(samples.size());
  std::vector<std::optional<std::string>> failed(samples.size());
  parallel_for(samples.size(), std::max(1u, config.in_flight), [&](std::size_t i) {
    const auto& s = samples[i];
    PromptParts parts{s.prefix, s.suffix, config.include_context ? s.context : std::vector<ContextSnippet>{}};
    try {
      auto prompt = assemble_prompt(parts, config.profile, config.intra_budget, config.cross_budget);
      ScoreResponse r = config.scope == PplScope::middle_only ? scorer.score(prompt, s.middle)
                                                              : scorer.score("", prompt + s.middle);
      scored[i] = make_scored(s.id, r.logprobs);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      failed[i] = e.what();
    }
  });

  ScoringReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (scored[i]) report.scored.push_back(std::move(*scored[i]));
    if (failed[i]) report.failures.push_back({samples[i].id, *failed[i]});
  }
  if (!samples.empty() && static_cast<double>(report.failures.size()) >
                              config.max_failure_fraction * static_cast<double>(samples.size())) {
    auto msg = std::to_string(report.failures.size()) + " of " + std::to_string(samples.size()) +
               " samples failed scoring";
    throw ScoringAborted(msg, std::move(report));
  }
  return report;
}

PplFilterResult filter_by_perplexity(const std::vector<FimSample>& samples, const std::vector<ScoredSample>& scores,
                                     const PplFilterConfig& config) {
  std::unordered_map<std::string, double> ppl;
  for (const auto& s : scores) ppl[s.sample_id] = s.ppl;

  PplFilterResult result;
  PoolOutcome pools[2] = {{"infill", config.infill, std::nullopt, 0, 0},
                          {"function", config.function, std::nullopt, 0, 0}};
  auto pool_of = [](const FimSample& s) { return s.strategy == Strategy::function_body ? 1 : 0; };

  std::vector<double> values[2];
  for (const auto& s : samples) {
    auto it = ppl.find(s.id);
    if (it != ppl.end()) values[pool_of(s)].push_back(it->second);
  }
  for (int p = 0; p < 2; ++p) {
    pools[p].scored = values[p].size();
    bool enough = pools[p].spec.mode == CutoffMode::quantile ? !values[p].empty() : values[p].size() >= 2;
    if (enough) pools[p].cutoffs = compute_cutoffs(values[p], pools[p].spec);
    else if (!values[p].empty())
      spdlog::warn("ppl filter: pool {} has too few scores to fit; kept unfiltered", pools[p].pool);
  }
  for (const auto& s : samples) {
    auto it = ppl.find(s.id);
    if (it == ppl.end()) {
      ++result.unscored;
      continue;
    }
    auto& pool = pools[pool_of(s)];
    if (pool.cutoffs && !within(*pool.cutoffs, it->second)) continue;
    ++pool.kept;
    result.kept.push_back(s);
  }
  result.pools = {pools[0], pools[1]};
  return result;
}

}  // namespace fimforge
