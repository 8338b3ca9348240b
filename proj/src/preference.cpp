#include "fimforge/preference.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "fimforge/error.hpp"
#include "fimforge/hashing.hpp"
#include "fimforge/text.hpp"

namespace fimforge {

double bleu4(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  // orders longer than the candidate have no n-grams and are left out of the mean
  const std::size_t max_n = std::min<std::size_t>(4, cand.size());
  double log_sum = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i)
      ++ref_counts[std::vector<std::string>(ref.begin() + static_cast<long>(i), ref.begin() + static_cast<long>(i + n))];
    std::map<std::vector<std::string>, std::size_t> cand_counts;
    std::size_t total = 0;
    for (std::size_t i = 0; i + n <= cand.size(); ++i, ++total)
      ++cand_counts[std::vector<std::string>(cand.begin() + static_cast<long>(i), cand.begin() + static_cast<long>(i + n))];
    std::size_t matches = 0;
    for (const auto& [gram, c] : cand_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(c, it->second);
    }
    double p = matches == 0 ? 1.0 / static_cast<double>(total + 1)
                            : static_cast<double>(matches) / static_cast<double>(total);
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

double bleu4(std::string_view candidate, std::string_view reference) {
  return bleu4(text::lex_code_strings(candidate), text::lex_code_strings(reference));
}

std::string_view to_string(CandidateStage s) {
  switch (s) {
    case CandidateStage::dedup: return "dedup";
    case CandidateStage::empty: return "empty";
    case CandidateStage::contains_ground_truth: return "contains_ground_truth";
    case CandidateStage::bleu: return "bleu";
  }
  return "unknown";
}

namespace {

std::string comparable(std::string_view s) { return std::string(text::rtrim(text::rtrim_lines(s))); }

}  // namespace

CandidateFilterResult filter_candidates(std::string_view ground_truth, const std::vector<std::string>& candidates,
                                        const CandidateFilterConfig& config) {
  if (text::is_blank(ground_truth)) throw Error("filter_candidates needs a non-empty ground truth");
  const std::string gt = comparable(ground_truth);
  const auto gt_tokens = text::lex_code_strings(ground_truth);

  struct Item {
    std::size_t order;
    const std::string* text;
    double bleu = -1;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < candidates.size(); ++i) items.push_back({i, &candidates[i]});
  auto bleu_of = [&](Item& it) {
    if (it.bleu < 0) it.bleu = bleu4(text::lex_code_strings(*it.text), gt_tokens);
    return it.bleu;
  };

  CandidateFilterResult result;
  for (auto stage : config.order) {
    StageTrace trace{stage, {}};
    std::vector<Item> next;
    std::set<std::string_view> seen;
    for (auto& it : items) {
      bool drop = false;
      switch (stage) {
        case CandidateStage::dedup: drop = !seen.insert(*it.text).second; break;
        case CandidateStage::empty: drop = text::is_blank(*it.text); break;
        case CandidateStage::contains_ground_truth: drop = comparable(*it.text).find(gt) != std::string::npos; break;
        case CandidateStage::bleu: drop = bleu_of(it) >= config.bleu_threshold; break;
      }
      if (drop) trace.dropped.push_back(*it.text);
      else next.push_back(it);
    }
    items = std::move(next);
    result.trace.push_back(std::move(trace));
  }
  for (auto& it : items) bleu_of(it);
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.bleu < b.bleu; });
  if (items.size() > config.keep) items.resize(config.keep);
  for (const auto& it : items) result.negatives.push_back(*it.text);
  return result;
}

std::vector<std::string> parse_generation_response(const Json& j) {
  std::vector<std::string> out;
  if (j.is_object() && j.contains("completions") && j["completions"].is_array()) {
    for (const auto& c : j["completions"]) {
      if (!c.is_string()) throw EndpointError("completion is not a string", false);
      out.push_back(c.get<std::string>());
    }
    return out;
  }
  if (j.is_object() && j.contains("choices") && j["choices"].is_array()) {
    for (const auto& c : j["choices"]) {
      if (!c.is_object() || !c.contains("text") || !c["text"].is_string())
        throw EndpointError("choice without text", false);
      out.push_back(c["text"].get<std::string>());
    }
    return out;
  }
  throw EndpointError("generator response has neither completions nor choices", false);
}

std::vector<std::string> EndpointGenerator::generate(const std::string& prompt, std::size_t n, double temperature,
                                                     std::size_t max_tokens) {
  Json request{{"prompt", prompt}, {"completion", ""},        {"echo_logprobs", false},
               {"n", n},           {"temperature", temperature}, {"max_tokens", max_tokens}};
  return parse_generation_response(call_with_retries(endpoint_, request, retry_));
}

CandidateBatch sample_candidates(const FimSample& sample, Generator& generator, const GenerationConfig& config) {
  CandidateBatch batch{sample.id, {}, config.temperature, config.n};
  auto prompt = assemble_prompt({sample.prefix, sample.suffix, sample.context}, config.profile, config.intra_budget,
                                config.cross_budget);
  try {
    batch.candidates = generator.generate(prompt, config.n, config.temperature, config.max_tokens);
  } catch (const EndpointError& e) {
    spdlog::warn("generator failed for sample {}: {}", sample.id, e.what());
    return batch;
  }
  if (batch.candidates.size() > config.n) batch.candidates.resize(config.n);
  if (batch.candidates.size() < config.n)
    spdlog::warn("sample {}: {} of {} candidates returned", sample.id, batch.candidates.size(), config.n);
  return batch;
}

std::string_view to_string(PairKind k) {
  switch (k) {
    case PairKind::rejection: return "rejection";
    case PairKind::suffix_repetition: return "suffix_repetition";
    case PairKind::prefix_repetition: return "prefix_repetition";
  }
  return "unknown";
}

std::optional<PairKind> pair_kind_from_name(std::string_view name) {
  for (auto k : {PairKind::rejection, PairKind::suffix_repetition, PairKind::prefix_repetition})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

PreferencePair make_pair(const FimSample& sample, PairKind kind, std::string rejected, const std::string& format) {
  PreferencePair p;
  p.source_sample_id = sample.id;
  p.kind = kind;
  p.prefix = sample.prefix;
  p.suffix = sample.suffix;
  p.context = sample.context;
  p.format = format;
  p.chosen = sample.middle;
  p.rejected = std::move(rejected);
  std::string key = std::string(to_string(kind)) + '\n' + sample.id + '\n' + p.rejected;
  p.id = sha256_hex(key).substr(0, 24);
  return p;
}

std::vector<PreferencePair> make_rejection_pairs(const FimSample& sample, const std::vector<std::string>& negatives,
                                                 const std::string& format) {
  std::vector<PreferencePair> out;
  for (const auto& neg : negatives)
    if (neg != sample.middle) out.push_back(make_pair(sample, PairKind::rejection, neg, format));
  return out;
}

namespace {

bool starts_with_line(std::string_view ground_truth, std::string_view line) {
  return text::starts_with(text::ltrim(ground_truth), text::trim(line));
}

}  // namespace

std::optional<std::string> suffix_repetition_line(const FimSample& s) {
  auto line = text::first_nonblank_line(s.suffix);
  if (text::is_blank(line) || starts_with_line(s.middle, line) || line == s.middle) return std::nullopt;
  return std::string(line);
}

std::optional<std::string> prefix_repetition_line(const FimSample& s) {
  auto line = text::last_nonblank_line(s.prefix);
  if (text::is_blank(line) || starts_with_line(s.middle, line) || line == s.middle) return std::nullopt;
  return std::string(line);
}

namespace {

// k indices from [0, n) without replacement, returned ascending.
std::vector<std::size_t> choose(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<PreferencePair> make_repetition_pairs(const std::vector<FimSample>& samples, Rng& rng, double suffix_frac,
                                                  double prefix_frac, const std::string& format) {
  if (!(suffix_frac >= 0 && suffix_frac <= 1 && prefix_frac >= 0 && prefix_frac <= 1))
    throw ConfigError("repetition fractions must lie in [0, 1]");
  std::vector<std::pair<std::size_t, std::string>> suffix_eligible;
  std::vector<std::pair<std::size_t, std::string>> prefix_eligible;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (auto l = suffix_repetition_line(samples[i])) suffix_eligible.emplace_back(i, std::move(*l));
    if (auto l = prefix_repetition_line(samples[i])) prefix_eligible.emplace_back(i, std::move(*l));
  }
  std::vector<PreferencePair> out;
  auto take = [&](const std::vector<std::pair<std::size_t, std::string>>& eligible, double frac, PairKind kind) {
    auto k = static_cast<std::size_t>(std::lround(frac * static_cast<double>(eligible.size())));
    for (auto i : choose(eligible.size(), k, rng))
      out.push_back(make_pair(samples[eligible[i].first], kind, eligible[i].second, format));
  };
  take(suffix_eligible, suffix_frac, PairKind::suffix_repetition);
  take(prefix_eligible, prefix_frac, PairKind::prefix_repetition);
  return out;
}

std::optional<std::string> validate_pair(const PreferencePair& p) {
  if (p.rejected.empty() || text::is_blank(p.rejected)) return "rejected is empty";
  if (p.chosen == p.rejected) return "chosen equals rejected";
  switch (p.kind) {
    case PairKind::rejection:
      break;
    case PairKind::suffix_repetition:
      if (p.rejected != text::first_nonblank_line(p.suffix)) return "rejected is not the first suffix line";
      if (starts_with_line(p.chosen, p.rejected)) return "ground truth starts with the suffix line";
      break;
    case PairKind::prefix_repetition:
      if (p.rejected != text::last_nonblank_line(p.prefix)) return "rejected is not the last prefix line";
      break;
  }
  return std::nullopt;
}

Json to_json(const PreferencePair& p) {
  Json ctx = Json::array();
  for (const auto& c : p.context) ctx.push_back(to_json(c));
  Json j;
  j["id"] = p.id;
  j["source_sample_id"] = p.source_sample_id;
  j["pair_kind"] = to_string(p.kind);
  j["prompt"] = Json{{"prefix", p.prefix}, {"suffix", p.suffix}, {"context", std::move(ctx)}, {"format", p.format}};
  j["chosen"] = p.chosen;
  j["rejected"] = p.rejected;
  return j;
}

PreferencePair pair_from_json(const Json& j) {
  try {
    PreferencePair p;
    p.id = j.at("id").get<std::string>();
    p.source_sample_id = j.at("source_sample_id").get<std::string>();
    auto kind = pair_kind_from_name(j.at("pair_kind").get<std::string>());
    if (!kind) throw Error("unknown pair_kind in pair " + p.id);
    p.kind = *kind;
    const auto& prompt = j.at("prompt");
    p.prefix = prompt.at("prefix").get<std::string>();
    p.suffix = prompt.at("suffix").get<std::string>();
    for (const auto& c : prompt.value("context", Json::array())) p.context.push_back(snippet_from_json(c));
    p.format = prompt.value("format", std::string());
    p.chosen = j.at("chosen").get<std::string>();
    p.rejected = j.at("rejected").get<std::string>();
    return p;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed pair record: ") + e.what());
  }
}

DpoResult dpo_loss(double logp_w_policy, double logp_l_policy, double logp_w_ref, double logp_l_ref, double beta) {
  const double dw = logp_w_policy - logp_w_ref;
  const double dl = logp_l_policy - logp_l_ref;
  const double z = beta * (dw - dl);
  // softplus(-z) without overflow
  const double loss = z < 0 ? -z + std::log1p(std::exp(z)) : std::log1p(std::exp(-z));
  DpoResult r;
  r.loss = loss;
  r.reward_margin = beta * dw - beta * dl;
  r.reward_accuracy = r.reward_margin > 0;
  return r;
}

}  // namespace fimforge
