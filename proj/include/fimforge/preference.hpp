#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fimforge/endpoint.hpp"
#include "fimforge/error.hpp"
#include "fimforge/prompt.hpp"
#include "fimforge/rng.hpp"
#include "fimforge/sample.hpp"

namespace fimforge {

/// BLEU-4: geometric mean of clipped 1..4-gram precisions times the brevity
/// penalty. A zero match count becomes 1/(total+1); candidates shorter than
/// four tokens average over the orders they have. Empty input scores 0.
double bleu4(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);
/// bleu4 over lexical code tokens.
double bleu4(std::string_view candidate, std::string_view reference);

enum class CandidateStage { dedup, empty, contains_ground_truth, bleu };

std::string_view to_string(CandidateStage s);

struct CandidateFilterConfig {
  double bleu_threshold = 0.7;
  std::size_t keep = 3;
  std::vector<CandidateStage> order = {CandidateStage::dedup, CandidateStage::empty,
                                       CandidateStage::contains_ground_truth, CandidateStage::bleu};
};

struct StageTrace {
  CandidateStage stage;
  std::vector<std::string> dropped;  // in generation order
};

struct CandidateFilterResult {
  std::vector<std::string> negatives;  // lowest BLEU first, ties by generation order
  std::vector<StageTrace> trace;
};

/// Runs the stages in config.order, then keeps the `keep` lowest-BLEU
/// survivors. Containment compares text with trailing whitespace removed from
/// every line. Throws Error when ground_truth is blank.
CandidateFilterResult filter_candidates(std::string_view ground_truth, const std::vector<std::string>& candidates,
                                        const CandidateFilterConfig& config = {});

struct CandidateBatch {
  std::string sample_id;
  std::vector<std::string> candidates;
  double temperature = 1.0;
  std::size_t n = 10;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::vector<std::string> generate(const std::string& prompt, std::size_t n, double temperature,
                                            std::size_t max_tokens) = 0;
};

/// {prompt, completion: "", echo_logprobs: false, n, temperature, max_tokens}
/// -> {completions: [...]} or {choices: [{text}]}.
class EndpointGenerator final : public Generator {
 public:
  explicit EndpointGenerator(Endpoint& endpoint, RetryPolicy retry = {}) : endpoint_(endpoint), retry_(retry) {}
  std::vector<std::string> generate(const std::string& prompt, std::size_t n, double temperature,
                                    std::size_t max_tokens) override;

 private:
  Endpoint& endpoint_;
  RetryPolicy retry_;
};

std::vector<std::string> parse_generation_response(const Json& response);

struct GenerationConfig {
  std::size_t n = 10;
  double temperature = 1.0;
  std::size_t max_tokens = 256;
  FormatProfile profile = builtin_profiles().at("psm");
  std::size_t intra_budget = 4096;
  std::size_t cross_budget = 4096;
};

/// Generator failures yield an empty batch (logged); short batches are logged.
CandidateBatch sample_candidates(const FimSample& sample, Generator& generator, const GenerationConfig& config = {});

enum class PairKind { rejection, suffix_repetition, prefix_repetition };

std::string_view to_string(PairKind k);
std::optional<PairKind> pair_kind_from_name(std::string_view name);

struct PreferencePair {
  std::string id;
  std::string source_sample_id;
  PairKind kind = PairKind::rejection;
  std::string prefix;
  std::string suffix;
  std::vector<ContextSnippet> context;
  std::string format;
  std::string chosen;
  std::string rejected;
};

PreferencePair make_pair(const FimSample& sample, PairKind kind, std::string rejected, const std::string& format);

/// One rejection pair per filtered negative.
std::vector<PreferencePair> make_rejection_pairs(const FimSample& sample, const std::vector<std::string>& negatives,
                                                 const std::string& format);

/// Rejected text for a suffix pair (first non-blank suffix line, verbatim)
/// when the ground truth does not start with it.
std::optional<std::string> suffix_repetition_line(const FimSample& sample);
/// Rejected text for a prefix pair (last non-blank prefix line, verbatim).
std::optional<std::string> prefix_repetition_line(const FimSample& sample);

/// Draws round(frac * |eligible|) samples per kind, without replacement.
std::vector<PreferencePair> make_repetition_pairs(const std::vector<FimSample>& samples, Rng& rng,
                                                  double suffix_frac = 0.10, double prefix_frac = 0.01,
                                                  const std::string& format = "psm");

/// Empty when the pair satisfies its kind's invariant, else the violation.
std::optional<std::string> validate_pair(const PreferencePair& pair);

Json to_json(const PreferencePair& p);
PreferencePair pair_from_json(const Json& j);

struct DpoResult {
  double loss = 0;
  double reward_margin = 0;
  bool reward_accuracy = false;
};

/// -ln sigmoid(beta * ((w_policy - w_ref) - (l_policy - l_ref))).
DpoResult dpo_loss(double logp_w_policy, double logp_l_policy, double logp_w_ref, double logp_l_ref, double beta);

}  // namespace fimforge
