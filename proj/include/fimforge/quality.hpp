#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fimforge/endpoint.hpp"
#include "fimforge/error.hpp"
#include "fimforge/prompt.hpp"
#include "fimforge/sample.hpp"

namespace fimforge {

/// exp(-mean(logprobs)). Throws Error on an empty list or a positive entry.
double perplexity(const std::vector<double>& logprobs);

struct ScoredSample {
  std::string sample_id;
  std::size_t token_count = 0;
  double sum_logprob = 0;
  double ppl = 1;
};

ScoredSample make_scored(std::string sample_id, const std::vector<double>& logprobs);

enum class CutoffMode { lognormal_sigma, quantile };

std::string_view to_string(CutoffMode m);
std::optional<CutoffMode> cutoff_mode_from_name(std::string_view name);

struct CutoffSpec {
  CutoffMode mode = CutoffMode::lognormal_sigma;
  double sigma_k = 2.0;
  double q_low = 0.05;
  double q_high = 0.95;

  /// Throws ConfigError unless 0 <= q_low < q_high <= 1 and sigma_k > 0.
  void validate() const;
};

struct Cutoffs {
  double low = 0;
  double high = 0;
};

/// mu, sigma: mean and population standard deviation of ln(ppl);
/// [exp(mu - k sigma), exp(mu + k sigma)]. Needs at least two values.
Cutoffs fit_lognormal_cutoffs(const std::vector<double>& ppls, double sigma_k = 2.0);

/// Rank cutoffs on the sorted values: ceil(q_low N) items are trimmed from
/// the bottom and ceil((1 - q_high) N) from the top.
Cutoffs quantile_cutoffs(const std::vector<double>& ppls, double q_low, double q_high);

Cutoffs compute_cutoffs(const std::vector<double>& ppls, const CutoffSpec& spec);

/// low <= ppl <= high, with a relative slack of 1e-12 for exp/log round trips.
bool within(const Cutoffs& c, double ppl);

struct ScoreResponse {
  std::vector<std::string> tokens;
  std::vector<double> logprobs;
};

/// Validates {tokens: [...], logprobs: [...]}; violations throw a
/// non-transient EndpointError.
ScoreResponse parse_score_response(const Json& response);

class Scorer {
 public:
  virtual ~Scorer() = default;
  /// Per-token log-probabilities of `completion` given `prompt`.
  virtual ScoreResponse score(const std::string& prompt, const std::string& completion) = 0;
};

/// Scorer over the JSON wire protocol {prompt, completion, echo_logprobs}.
class EndpointScorer final : public Scorer {
 public:
  explicit EndpointScorer(Endpoint& endpoint, RetryPolicy retry = {}) : endpoint_(endpoint), retry_(retry) {}
  ScoreResponse score(const std::string& prompt, const std::string& completion) override;

 private:
  Endpoint& endpoint_;
  RetryPolicy retry_;
};

enum class PplScope { middle_only, full_sequence };

struct ScoringConfig {
  FormatProfile profile = builtin_profiles().at("psm");
  std::size_t intra_budget = 4096;
  std::size_t cross_budget = 4096;
  bool include_context = true;
  PplScope scope = PplScope::middle_only;
  double max_failure_fraction = 0.10;
  unsigned in_flight = 4;
};

struct ScoringFailure {
  std::string sample_id;
  std::string reason;
};

struct ScoringReport {
  std::vector<ScoredSample> scored;  // input order, failures omitted
  std::vector<ScoringFailure> failures;
};

class ScoringAborted : public Error {
 public:
  ScoringAborted(const std::string& what, ScoringReport report) : Error(what), report_(std::move(report)) {}
  const ScoringReport& report() const { return report_; }

 private:
  ScoringReport report_;
};

/// Scores every sample; failures are recorded per sample. Throws
/// ScoringAborted when more than max_failure_fraction of samples fail.
ScoringReport score_corpus(const std::vector<FimSample>& samples, Scorer& scorer, const ScoringConfig& config);

struct PplFilterConfig {
  CutoffSpec infill{CutoffMode::lognormal_sigma, 2.0, 0.05, 0.95};
  CutoffSpec function{CutoffMode::quantile, 2.0, 0.05, 0.95};
};

struct PoolOutcome {
  std::string pool;
  CutoffSpec spec;
  std::optional<Cutoffs> cutoffs;  // absent when too few scores to fit
  std::size_t scored = 0;
  std::size_t kept = 0;
};

struct PplFilterResult {
  std::vector<FimSample> kept;
  std::vector<PoolOutcome> pools;
  std::size_t unscored = 0;  // samples whose scoring failed; excluded
};

/// FIM samples use `infill` cutoffs and function_body samples `function`
/// cutoffs, each fitted on its own pool.
PplFilterResult filter_by_perplexity(const std::vector<FimSample>& samples, const std::vector<ScoredSample>& scores,
                                     const PplFilterConfig& config);

}  // namespace fimforge
