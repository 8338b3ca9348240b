#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "fimforge/preference.hpp"
#include "support/fake_endpoints.hpp"

namespace fimforge {
namespace {

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Reference BLEU-4 with add-1 smoothing on zero-match orders, averaged over the
// orders a short candidate has.
double reference_bleu(const std::vector<std::string>& c, const std::vector<std::string>& r) {
  if (c.empty() || r.empty()) return 0;
  auto grams = [](const std::vector<std::string>& t, std::size_t n) {
    std::map<std::string, int> m;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      std::string key;
      for (std::size_t k = i; k < i + n; ++k) key += t[k] + '\x1f';
      ++m[key];
    }
    return m;
  };
  const std::size_t orders = std::min<std::size_t>(4, c.size());
  double prod = 1;
  for (std::size_t n = 1; n <= orders; ++n) {
    auto cg = grams(c, n), rg = grams(r, n);
    int total = 0, hit = 0;
    for (auto& [g, k] : cg) {
      total += k;
      hit += std::min(k, rg.count(g) ? rg[g] : 0);
    }
    prod *= hit ? double(hit) / total : 1.0 / (total + 1);
  }
  double bp = c.size() > r.size() ? 1.0 : std::exp(1.0 - double(r.size()) / double(c.size()));
  return bp * std::pow(prod, 1.0 / orders);
}

TEST(Bleu, IdenticalIsOne) { EXPECT_DOUBLE_EQ(bleu4(words("a b c d e"), words("a b c d e")), 1.0); }

TEST(Bleu, OneWordChanged) {
  // precisions 4/5, 3/4, 2/3, 1/2, equal lengths
  EXPECT_NEAR(bleu4(words("a b c d e"), words("a b c d f")), std::pow(0.2, 0.25), 1e-12);
  EXPECT_NEAR(bleu4(words("a b c d e"), words("a b c d f")), 0.668740304976422, 1e-12);
}

TEST(Bleu, NoOverlapIsSmall) {
  std::vector<std::string> ref(200, "r"), cand(200, "c");
  EXPECT_LT(bleu4(cand, ref), 0.01);
}

TEST(Bleu, ShortCandidateWithoutOverlap) {
  EXPECT_DOUBLE_EQ(bleu4(words("p"), words("q")), 0.5);
  EXPECT_DOUBLE_EQ(bleu4(words("p"), words("p")), 1.0);
}

TEST(Bleu, EmptyInput) {
  EXPECT_EQ(bleu4(std::vector<std::string>{}, words("a")), 0.0);
  EXPECT_EQ(bleu4(words("a"), std::vector<std::string>{}), 0.0);
}

TEST(Bleu, MatchesReferenceOnRandomSequences) {
  std::mt19937_64 gen(8);
  const std::vector<std::string> vocab = {"x", "y", "z", "(", ")", "+", "1"};
  std::uniform_int_distribution<std::size_t> len(1, 15), w(0, vocab.size() - 1);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::string> c(len(gen)), r(len(gen));
    for (auto& t : c) t = vocab[w(gen)];
    for (auto& t : r) t = vocab[w(gen)];
    EXPECT_NEAR(bleu4(c, r), reference_bleu(c, r), 1e-12);
  }
}

TEST(Bleu, CodeTokenized) { EXPECT_DOUBLE_EQ(bleu4("foo(a, b)", "foo( a,b )"), 1.0); }

const std::vector<std::string> kWorked = {"x+1", "", "y", "y", "a x+1 b"};

std::vector<std::string> dropped_at(const CandidateFilterResult& r, CandidateStage s) {
  for (const auto& t : r.trace)
    if (t.stage == s) return t.dropped;
  return {"<stage missing>"};
}

TEST(FilterCandidates, WorkedExample) {
  auto r = filter_candidates("x+1", kWorked);
  EXPECT_THAT(r.negatives, ::testing::ElementsAre("y"));
  EXPECT_THAT(dropped_at(r, CandidateStage::dedup), ::testing::ElementsAre("y"));
  EXPECT_THAT(dropped_at(r, CandidateStage::empty), ::testing::ElementsAre(""));
  EXPECT_THAT(dropped_at(r, CandidateStage::contains_ground_truth), ::testing::ElementsAre("x+1", "a x+1 b"));
  EXPECT_TRUE(dropped_at(r, CandidateStage::bleu).empty());
}

TEST(FilterCandidates, SwappingContainmentAndBleuIsVisible) {
  CandidateFilterConfig cfg;
  cfg.order = {CandidateStage::dedup, CandidateStage::empty, CandidateStage::bleu,
               CandidateStage::contains_ground_truth};
  auto r = filter_candidates("x+1", kWorked, cfg);
  EXPECT_THAT(r.negatives, ::testing::ElementsAre("y"));
  EXPECT_THAT(dropped_at(r, CandidateStage::bleu), ::testing::ElementsAre("x+1"));
  EXPECT_THAT(dropped_at(r, CandidateStage::contains_ground_truth), ::testing::ElementsAre("a x+1 b"));
  EXPECT_NE(dropped_at(r, CandidateStage::bleu), dropped_at(filter_candidates("x+1", kWorked), CandidateStage::bleu));
}

TEST(FilterCandidates, CapKeepsLowestBleu) {
  std::vector<std::string> c = {"return a", "b", "c", "return a + c", "d"};
  auto r = filter_candidates("return a + b", c);
  ASSERT_EQ(r.negatives.size(), 3u);
  // c and d tie below b (which shares a token) and keep generation order
  EXPECT_THAT(r.negatives, ::testing::ElementsAre("c", "d", "b"));
}

TEST(FilterCandidates, CapIsThree) {
  auto r = filter_candidates("gt", {"p", "q", "r", "s", "t"});
  EXPECT_EQ(r.negatives.size(), 3u);
}

TEST(FilterCandidates, AllEqualGroundTruth) {
  EXPECT_TRUE(filter_candidates("x+1", {"x+1", "x+1", "x+1  "}).negatives.empty());
}

TEST(FilterCandidates, ContainmentIgnoresTrailingWhitespace) {
  auto r = filter_candidates("a\nb", {"a  \nb\t\nc"});
  EXPECT_TRUE(r.negatives.empty());
}

TEST(FilterCandidates, BlankGroundTruthRejected) { EXPECT_THROW(filter_candidates("  ", {"a"}), Error); }

FimSample sample(std::string prefix, std::string middle, std::string suffix) {
  FimSample s;
  s.repo_id = "r";
  s.path = "f.py";
  s.prefix = std::move(prefix);
  s.middle = std::move(middle);
  s.suffix = std::move(suffix);
  s.id = sample_id(s.repo_id, s.path, s.prefix, s.middle, s.suffix);
  return s;
}

TEST(RepetitionLines, SuffixEligibility) {
  EXPECT_EQ(suffix_repetition_line(sample("p\n", "x = 1", "\n\n  y = 2\nz\n")), "  y = 2");
  EXPECT_FALSE(suffix_repetition_line(sample("p\n", "y = 2\nw", "\ny = 2\n")));
  EXPECT_FALSE(suffix_repetition_line(sample("p\n", "x", "\n \n")));
}

TEST(RepetitionLines, PrefixLine) {
  EXPECT_EQ(prefix_repetition_line(sample("a\n  b = 1\n\n", "x", "\n")), "  b = 1");
  EXPECT_FALSE(prefix_repetition_line(sample("", "x", "\n")));
}

std::vector<FimSample> eligible_samples(std::size_t n) {
  std::vector<FimSample> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(sample("def f():\n    a = " + std::to_string(i) + "\n    ", "b = a + 1",
                         "\n    return b  # " + std::to_string(i) + "\n"));
  return out;
}

TEST(RepetitionPairs, FractionsOfEligible) {
  auto samples = eligible_samples(100);
  samples.push_back(sample("p\n", "return b", "\nreturn b\n"));  // suffix-ineligible
  Rng rng(4);
  auto pairs = make_repetition_pairs(samples, rng, 0.10, 0.01);
  std::size_t suffix = 0, prefix = 0;
  std::set<std::string> sources;
  for (const auto& p : pairs) {
    EXPECT_FALSE(validate_pair(p)) << *validate_pair(p);
    suffix += p.kind == PairKind::suffix_repetition;
    prefix += p.kind == PairKind::prefix_repetition;
    if (p.kind == PairKind::suffix_repetition) {
      EXPECT_TRUE(sources.insert(p.source_sample_id).second);
      EXPECT_EQ(p.rejected, text::first_nonblank_line(p.suffix));
    }
  }
  EXPECT_EQ(suffix, 10u);
  EXPECT_EQ(prefix, 1u);
}

TEST(RepetitionPairs, DeterministicPerSeed) {
  auto samples = eligible_samples(50);
  Rng a(1), b(1);
  auto pa = make_repetition_pairs(samples, a, 0.2, 0.1);
  auto pb = make_repetition_pairs(samples, b, 0.2, 0.1);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(to_json(pa[i]).dump(), to_json(pb[i]).dump());
}

TEST(RepetitionPairs, BadFraction) {
  Rng rng(1);
  EXPECT_THROW(make_repetition_pairs({}, rng, 1.5, 0.0), ConfigError);
}

TEST(ValidatePair, Violations) {
  auto s = eligible_samples(1)[0];
  EXPECT_FALSE(validate_pair(make_pair(s, PairKind::rejection, "c = 2", "psm")));
  EXPECT_TRUE(validate_pair(make_pair(s, PairKind::rejection, "", "psm")));
  EXPECT_TRUE(validate_pair(make_pair(s, PairKind::rejection, s.middle, "psm")));
  EXPECT_TRUE(validate_pair(make_pair(s, PairKind::suffix_repetition, "something else", "psm")));
  EXPECT_TRUE(validate_pair(make_pair(s, PairKind::prefix_repetition, "something else", "psm")));
  auto bad = sample("p\n", "y = 2 + 1", "\ny = 2\n");
  EXPECT_TRUE(validate_pair(make_pair(bad, PairKind::suffix_repetition, "y = 2", "psm")));
}

TEST(RejectionPairs, OnePerNegative) {
  auto s = eligible_samples(1)[0];
  auto pairs = make_rejection_pairs(s, {"n1", "n2"}, "psm");
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].chosen, s.middle);
  EXPECT_EQ(pairs[1].rejected, "n2");
  EXPECT_NE(pairs[0].id, pairs[1].id);
  auto j = to_json(pairs[0]);
  EXPECT_EQ(j.at("pair_kind"), "rejection");
  EXPECT_EQ(j.at("prompt").at("prefix"), s.prefix);
  EXPECT_EQ(to_json(pair_from_json(j)).dump(), j.dump());
}

TEST(SampleCandidates, UsesGeneratorAndKeepsOrder) {
  testing::FakeGenerator fake;
  EndpointGenerator gen(fake);
  auto s = eligible_samples(1)[0];
  auto batch = sample_candidates(s, gen);
  EXPECT_EQ(batch.candidates.size(), 10u);
  EXPECT_EQ(batch.n, 10u);
  EXPECT_EQ(batch.temperature, 1.0);
  EXPECT_EQ(batch.sample_id, s.id);
  EXPECT_EQ(sample_candidates(s, gen).candidates, batch.candidates);
}

TEST(SampleCandidates, FailureGivesEmptyBatch) {
  testing::FakeGenerator fake;
  testing::FlakyEndpoint flaky(fake, 100, false);
  EndpointGenerator gen(flaky, RetryPolicy{1, 1});
  EXPECT_TRUE(sample_candidates(eligible_samples(1)[0], gen).candidates.empty());
}

TEST(GenerationResponse, BothShapes) {
  EXPECT_THAT(parse_generation_response(Json{{"completions", {"a", "b"}}}), ::testing::ElementsAre("a", "b"));
  EXPECT_THAT(parse_generation_response(Json::parse(R"({"choices":[{"text":"a"},{"text":"b"}]})")),
              ::testing::ElementsAre("a", "b"));
  EXPECT_THROW(parse_generation_response(Json{{"other", 1}}), EndpointError);
}

TEST(Dpo, ZeroMarginIsLn2) {
  auto r = dpo_loss(-3, -5, -3, -5, 0.1);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
  EXPECT_EQ(r.reward_margin, 0.0);
  EXPECT_FALSE(r.reward_accuracy);
}

TEST(Dpo, WorkedValue) {
  // beta 0.9, (dw - dl) = 1
  auto r = dpo_loss(-1.0, -4.0, -2.0, -4.0, 0.9);
  EXPECT_NEAR(r.loss, std::log1p(std::exp(-0.9)), 1e-12);
  EXPECT_NEAR(r.loss, 0.3411538747320879, 1e-12);
  EXPECT_NEAR(r.reward_margin, 0.9, 1e-12);
  EXPECT_TRUE(r.reward_accuracy);
}

TEST(Dpo, MatchesDirectFormulaOnGridAndDecreases) {
  double prev = INFINITY;
  for (int i = -500; i <= 500; ++i) {
    const double delta = i / 50.0, beta = 0.5;
    auto r = dpo_loss(delta, 0.0, 0.0, 0.0, beta);
    const double direct = -std::log(1.0 / (1.0 + std::exp(-beta * delta)));
    EXPECT_NEAR(r.loss, direct, 1e-12);
    EXPECT_LT(r.loss, prev);
    EXPECT_GE(r.loss, 0.0);
    prev = r.loss;
  }
  EXPECT_LT(dpo_loss(1000, 0, 0, 0, 1).loss, 1e-300);
}

}  // namespace
}  // namespace fimforge
