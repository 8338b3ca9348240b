#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <mutex>
#include <numeric>
#include <random>

#include "fimforge/quality.hpp"
#include "support/fake_endpoints.hpp"

namespace fimforge {
namespace {

using testing::FakeScorer;
using testing::FlakyEndpoint;

TEST(Perplexity, Examples) {
  EXPECT_DOUBLE_EQ(perplexity({0.0}), 1.0);
  EXPECT_NEAR(perplexity({-std::log(2.0), -std::log(2.0)}), 2.0, 1e-12);
  EXPECT_NEAR(perplexity({-1.0, -2.0, -3.0}), std::exp(2.0), 1e-9);
  EXPECT_NEAR(perplexity({-1.0, -2.0, -3.0}), 7.3890561, 1e-7);
}

TEST(Perplexity, Errors) {
  EXPECT_THROW(perplexity({}), Error);
  EXPECT_THROW(perplexity({-1.0, 0.5}), Error);
}

TEST(Perplexity, AppendingTheMeanKeepsValue) {
  std::vector<double> lp = {-0.3, -1.7, -2.2, -0.05};
  double mean = std::accumulate(lp.begin(), lp.end(), 0.0) / lp.size();
  double before = perplexity(lp);
  lp.push_back(mean);
  EXPECT_NEAR(perplexity(lp), before, 1e-12);
}

TEST(ScoredSample, Fields) {
  auto s = make_scored("id", {-1.0, -3.0});
  EXPECT_EQ(s.token_count, 2u);
  EXPECT_DOUBLE_EQ(s.sum_logprob, -4.0);
  EXPECT_NEAR(s.ppl, std::exp(2.0), 1e-12);
}

TEST(Lognormal, Degenerate) {
  auto c = fit_lognormal_cutoffs({4, 4, 4});
  EXPECT_NEAR(c.low, 4, 1e-12);
  EXPECT_NEAR(c.high, 4, 1e-12);
  EXPECT_TRUE(within(c, 4.0));
}

// mu = 2, population sigma = sqrt(8/3)
TEST(Lognormal, HandComputedCutoffs) {
  auto c = fit_lognormal_cutoffs({1.0, std::exp(2.0), std::exp(4.0)}, 2.0);
  const double sigma = std::sqrt(8.0 / 3.0);
  EXPECT_NEAR(c.low, std::exp(2 - 2 * sigma), 1e-6);
  EXPECT_NEAR(c.high, std::exp(2 + 2 * sigma), 1e-6);
  EXPECT_NEAR(c.low, 0.281961054, 1e-6);
  EXPECT_NEAR(c.high, 193.637203596, 1e-6);
}

TEST(Lognormal, ScalesWithInput) {
  std::vector<double> v = {1.5, 3.0, 7.0, 20.0}, w;
  for (double x : v) w.push_back(10 * x);
  auto a = fit_lognormal_cutoffs(v), b = fit_lognormal_cutoffs(w);
  EXPECT_NEAR(b.low, 10 * a.low, 1e-9);
  EXPECT_NEAR(b.high, 10 * a.high, 1e-9);
}

TEST(Lognormal, TooFewValues) {
  EXPECT_THROW(fit_lognormal_cutoffs({3.0}), Error);
  EXPECT_THROW(fit_lognormal_cutoffs({}), Error);
}

TEST(Lognormal, RetainsTwoSigmaMassOnSyntheticData) {
  std::mt19937_64 gen(3);
  std::lognormal_distribution<double> dist(1.3, 0.8);
  std::vector<double> v(100000);
  for (auto& x : v) x = dist(gen);
  auto c = fit_lognormal_cutoffs(v);
  double kept = std::count_if(v.begin(), v.end(), [&](double x) { return within(c, x); }) / double(v.size());
  EXPECT_NEAR(kept, 0.9545, 0.01);
}

std::vector<double> one_to(int n) {
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) v.push_back(i);
  return v;
}

TEST(Quantile, DropsOneFromEachEndOfTwenty) {
  auto v = one_to(20);
  auto c = quantile_cutoffs(v, 0.05, 0.95);
  std::vector<double> dropped;
  for (double x : v)
    if (!within(c, x)) dropped.push_back(x);
  EXPECT_THAT(dropped, ::testing::ElementsAre(1.0, 20.0));
}

TEST(Quantile, FullRangeKeepsAll) {
  auto v = one_to(20);
  auto c = quantile_cutoffs(v, 0.0, 1.0);
  for (double x : v) EXPECT_TRUE(within(c, x));
}

TEST(Quantile, AllEqualKeepsAll) {
  std::vector<double> v(10, 2.5);
  auto c = quantile_cutoffs(v, 0.05, 0.95);
  for (double x : v) EXPECT_TRUE(within(c, x));
}

TEST(CutoffSpec, Validation) {
  EXPECT_NO_THROW((CutoffSpec{CutoffMode::quantile, 2.0, 0.0, 1.0}.validate()));
  EXPECT_THROW((CutoffSpec{CutoffMode::quantile, 2.0, 0.5, 0.5}.validate()), ConfigError);
  EXPECT_THROW((CutoffSpec{CutoffMode::quantile, 2.0, -0.1, 0.9}.validate()), ConfigError);
  EXPECT_THROW((CutoffSpec{CutoffMode::lognormal_sigma, 0.0, 0.05, 0.95}.validate()), ConfigError);
}

TEST(ScoreResponse, ProtocolChecks) {
  auto r = parse_score_response(Json{{"tokens", {"a", "b"}}, {"logprobs", {-0.1, -0.2}}});
  EXPECT_EQ(r.logprobs.size(), 2u);
  EXPECT_THROW(parse_score_response(Json{{"tokens", {"a"}}, {"logprobs", {-0.1, -0.2}}}), EndpointError);
  EXPECT_THROW(parse_score_response(Json{{"tokens", {"a"}}}), EndpointError);
  EXPECT_THROW(parse_score_response(Json{{"tokens", {"a"}}, {"logprobs", {"x"}}}), EndpointError);
}

std::vector<FimSample> toy_samples(std::size_t n) {
  std::vector<FimSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    FimSample s;
    s.repo_id = "r";
    s.path = "f.py";
    s.prefix = "def f" + std::to_string(i) + "(x):\n    return ";
    s.middle = "x * " + std::to_string(i + 1);
    s.suffix = "\n";
    s.id = sample_id(s.repo_id, s.path, s.prefix, s.middle, s.suffix);
    if (i % 5 == 0) s.strategy = Strategy::function_body;
    out.push_back(s);
  }
  return out;
}

class RecordingEndpoint : public Endpoint {
 public:
  explicit RecordingEndpoint(Endpoint& inner) : inner_(inner) {}
  Json call(const Json& request) override {
    {
      std::lock_guard lock(mutex_);
      requests.push_back(request);
    }
    return inner_.call(request);
  }
  std::vector<Json> requests;

 private:
  Endpoint& inner_;
  std::mutex mutex_;
};

TEST(ScoreCorpus, MiddleOnlyWireFormat) {
  FakeScorer fake;
  RecordingEndpoint rec(fake);
  EndpointScorer scorer(rec);
  auto samples = toy_samples(1);
  ScoringConfig cfg;
  auto report = score_corpus(samples, scorer, cfg);
  ASSERT_EQ(rec.requests.size(), 1u);
  const auto& req = rec.requests[0];
  EXPECT_EQ(req.at("completion"), samples[0].middle);
  EXPECT_EQ(req.at("echo_logprobs"), true);
  EXPECT_EQ(req.at("prompt"), "<fim_prefix>" + samples[0].prefix + "<fim_suffix>" + samples[0].suffix + "<fim_middle>");
  ASSERT_EQ(report.scored.size(), 1u);
  EXPECT_EQ(report.scored[0].sample_id, samples[0].id);
}

TEST(ScoreCorpus, DeterministicAcrossConcurrency) {
  FakeScorer fake;
  EndpointScorer scorer(fake);
  auto samples = toy_samples(30);
  ScoringConfig cfg;
  cfg.in_flight = 1;
  auto a = score_corpus(samples, scorer, cfg);
  cfg.in_flight = 8;
  auto b = score_corpus(samples, scorer, cfg);
  ASSERT_EQ(a.scored.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(a.scored[i].sample_id, samples[i].id);
    EXPECT_EQ(a.scored[i].ppl, b.scored[i].ppl);
  }
}

TEST(ScoreCorpus, TransientFailuresRetried) {
  FakeScorer fake;
  FlakyEndpoint flaky(fake, 2, true);
  EndpointScorer scorer(flaky, RetryPolicy{3, 1});
  ScoringConfig cfg;
  cfg.in_flight = 1;
  auto report = score_corpus(toy_samples(5), scorer, cfg);
  EXPECT_EQ(report.scored.size(), 5u);
  EXPECT_TRUE(report.failures.empty());
}

TEST(ScoreCorpus, PersistentFailuresRecorded) {
  FakeScorer fake;
  FlakyEndpoint flaky(fake, 2, false);
  EndpointScorer scorer(flaky, RetryPolicy{3, 1});
  auto report = score_corpus(toy_samples(20), scorer, {});
  EXPECT_EQ(report.scored.size(), 18u);
  EXPECT_EQ(report.failures.size(), 2u);
}

TEST(ScoreCorpus, AbortsPastTenPercent) {
  FakeScorer fake;
  FlakyEndpoint flaky(fake, 3, false);
  EndpointScorer scorer(flaky, RetryPolicy{3, 1});
  try {
    score_corpus(toy_samples(20), scorer, {});
    FAIL() << "expected abort";
  } catch (const ScoringAborted& e) {
    EXPECT_EQ(e.report().failures.size(), 3u);
    EXPECT_EQ(e.report().scored.size(), 17u);
  }
}

TEST(FilterByPerplexity, KeepsExactlyWithinCutoffsAndIsIdempotent) {
  FakeScorer fake;
  EndpointScorer scorer(fake);
  auto samples = toy_samples(200);
  auto report = score_corpus(samples, scorer, {});
  PplFilterConfig cfg;
  cfg.infill.sigma_k = 1.0;  // tight enough to drop something
  auto result = filter_by_perplexity(samples, report.scored, cfg);
  ASSERT_EQ(result.pools.size(), 2u);
  std::map<std::string, double> ppl;
  for (const auto& s : report.scored) ppl[s.sample_id] = s.ppl;

  std::set<std::string> kept;
  for (const auto& s : result.kept) kept.insert(s.id);
  for (const auto& s : samples) {
    const auto& pool = result.pools[s.strategy == Strategy::function_body ? 1 : 0];
    ASSERT_TRUE(pool.cutoffs);
    EXPECT_EQ(kept.count(s.id) == 1, within(*pool.cutoffs, ppl[s.id])) << s.id;
  }
  EXPECT_LT(result.kept.size(), samples.size());
  EXPECT_EQ(result.pools[0].scored + result.pools[1].scored, samples.size());
  EXPECT_EQ(result.pools[0].kept + result.pools[1].kept, result.kept.size());

  // the same cutoffs applied to the survivors drop nothing
  for (const auto& s : result.kept)
    EXPECT_TRUE(within(*result.pools[s.strategy == Strategy::function_body ? 1 : 0].cutoffs, ppl[s.id]));
}

TEST(FilterByPerplexity, UnscoredExcluded) {
  auto samples = toy_samples(4);
  std::vector<ScoredSample> scores = {make_scored(samples[1].id, {-1.0}), make_scored(samples[2].id, {-1.2})};
  auto result = filter_by_perplexity(samples, scores, {});
  EXPECT_EQ(result.unscored, 2u);
  EXPECT_EQ(result.kept.size(), 2u);
}

}  // namespace
}  // namespace fimforge
