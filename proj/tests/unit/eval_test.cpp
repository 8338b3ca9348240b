#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <map>
#include <random>

#include "fimforge/eval.hpp"
#include "fimforge/jsonl.hpp"
#include "support/fake_endpoints.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

namespace fimforge {
namespace {

using testing::fixture;

TEST(ExactMatch, Examples) {
  EXPECT_EQ(exact_match("x\n", "x"), 1);
  EXPECT_EQ(exact_match("x", "y"), 0);
  EXPECT_EQ(exact_match("  a=b ", "a=b"), 1);
  EXPECT_EQ(exact_match("a\r\nb", "a\nb"), 1);
  EXPECT_EQ(exact_match("a\nb", "a b"), 0);
}

TEST(EditSimilarity, Examples) {
  EXPECT_DOUBLE_EQ(edit_similarity("same", "same"), 1.0);
  EXPECT_NEAR(edit_similarity("kitten", "sitting"), 1.0 - 3.0 / 7.0, 1e-15);
  EXPECT_EQ(edit_similarity("", "a"), 0.0);
  EXPECT_EQ(edit_similarity("", ""), 1.0);
  EXPECT_NEAR(edit_similarity("é", "e"), 0.0, 1e-15);  // one code point, not two bytes
}

TEST(EditSimilarity, MatchesDpOracleAndIsSymmetric) {
  std::mt19937_64 gen(12);
  const std::vector<std::string> alphabet = {"a", "b", "c", " ", "\n", "é", "λ"};
  std::uniform_int_distribution<std::size_t> len(0, 40), pick(0, alphabet.size() - 1);
  for (int i = 0; i < 2000; ++i) {
    std::string a, b;
    for (auto n = len(gen); n > 0; --n) a += alphabet[pick(gen)];
    for (auto n = len(gen); n > 0; --n) b += alphabet[pick(gen)];
    EXPECT_EQ(edit_similarity(a, b), testing::edit_similarity_oracle(a, b));
    EXPECT_EQ(edit_similarity(a, b), edit_similarity(b, a));
    EXPECT_EQ(edit_similarity(a, b) == 1.0, a == b);
  }
}

TEST(Repetition, HandLabeledTable) {
  const auto& cases = testing::repetition_cases();
  ASSERT_EQ(cases.size(), 30u);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    EXPECT_EQ(to_string(classify_repetition(c.generated, c.prefix, c.suffix, c.ground_truth)), c.expected)
        << "case " << i + 1;
  }
}

TEST(ScoreCase, ExactImpliesFullSimilarityAndNoRepetition) {
  EvalCase c;
  c.prefix = "x\n";
  c.suffix = "\nx\n";
  c.ground_truth = "x";
  auto r = score_case(c, "x\n");
  EXPECT_EQ(r.em, 1);
  EXPECT_EQ(r.es, 1.0);
  EXPECT_EQ(r.repetition, Repetition::none);
}

const FormatProfile kAngle{"angle", FimLayout::PSM, "<P>", "<S>", "<M>", "<F>"};

TEST(Prompt, Layouts) {
  EXPECT_EQ(assemble_prompt({"a", "b", {}}, kAngle, 100, 100), "<P>a<S>b<M>");
  EXPECT_EQ(assemble_prompt({"a", "b", {}}, kAngle, FimLayout::SPM, 100, 100), "<S>b<P>a<M>");
}

TEST(Prompt, OversizePrefixKeepsItsTail) {
  std::string prefix;
  for (int i = 0; i < 200; ++i) prefix += "tok" + std::to_string(i) + " ";
  auto prompt = assemble_prompt({prefix, "end", {}}, kAngle, 50, 100);
  auto p = prompt.find("<P>") + 3, s = prompt.find("<S>");
  auto kept = prompt.substr(p, s - p);
  EXPECT_LT(kept.size(), prefix.size());
  EXPECT_FALSE(kept.empty());
  EXPECT_TRUE(prefix.ends_with(kept));
  EXPECT_LE(default_token_counter().count(kept) + default_token_counter().count("end"), 50u);
}

TEST(Prompt, ContextFirstLowestScoreDroppedFirst) {
  std::vector<ContextSnippet> ctx = {
      {"hi.py", ContextChannel::bm25, "high score text", 9.0, 3},
      {"lo.py", ContextChannel::bm25, "low score text", 1.0, 3},
      {"dep.py", ContextChannel::dependency, "class Dep: ...", std::nullopt, 4},
  };
  auto full = assemble_prompt({"a", "b", ctx}, kAngle, 100, 1000);
  EXPECT_LT(full.find("high score text"), full.find("<P>"));
  EXPECT_NE(full.find("low score text"), std::string::npos);
  EXPECT_NE(full.find("<F>"), std::string::npos);
  // one token short of the full rendered context
  const auto rendered = default_token_counter().count(full.substr(0, full.find("<P>")));
  auto tight = assemble_prompt({"a", "b", ctx}, kAngle, 100, rendered - 1);
  EXPECT_NE(tight.find("class Dep"), std::string::npos);
  EXPECT_EQ(tight.find("low score text"), std::string::npos) << tight;
  EXPECT_NE(tight.find("high score text"), std::string::npos);
}

TEST(Prompt, BudgetsBelowOne) {
  EXPECT_THROW(assemble_prompt({"a", "b", {}}, kAngle, 0, 10), ConfigError);
  EXPECT_THROW(assemble_prompt({"a", "b", {}}, kAngle, 10, 0), ConfigError);
}

// Answers by the "c<N>" marker on the prompt's case line.
class ScriptedGenerator : public Generator {
 public:
  std::vector<std::string> generate(const std::string& prompt, std::size_t, double temperature,
                                    std::size_t) override {
    EXPECT_EQ(temperature, 0.0);
    static const std::map<std::string, std::string> answers = {
        {"c1", "return a + b"}, {"c2", "x = 2"}, {"c3", "}"}, {"c4", "int m = 0;"}, {"c5", ""}};
    for (const auto& [marker, out] : answers)
      if (prompt.find(" " + marker + "\n") != std::string::npos) return {out};
    throw EndpointError("unknown case", false);
  }
};

std::vector<EvalCase> benchmark() {
  std::vector<EvalCase> cases;
  for (const auto& j : read_jsonl(fixture("eval/benchmark.jsonl"))) cases.push_back(case_from_json(j));
  return cases;
}

TEST(RunEval, MeansOnFiveCases) {
  ScriptedGenerator gen;
  auto report = run_eval(benchmark(), gen, {});
  ASSERT_EQ(report.records.size(), 5u);
  EXPECT_EQ(report.failures, 0u);
  ASSERT_EQ(report.per_language.size(), 2u);

  const auto& java = report.per_language[0];
  EXPECT_EQ(java.name, "java");
  EXPECT_EQ(java.n, 3u);
  EXPECT_NEAR(java.em, 0.0, 1e-9);
  EXPECT_NEAR(java.es, (0.0 + 0.9 + 0.0) / 3, 1e-9);
  EXPECT_NEAR(java.prefix_rep, 1.0 / 3, 1e-9);
  EXPECT_NEAR(java.suffix_rep, 1.0 / 3, 1e-9);

  const auto& py = report.per_language[1];
  EXPECT_EQ(py.n, 2u);
  EXPECT_NEAR(py.em, 0.5, 1e-9);
  EXPECT_NEAR(py.es, (1.0 + 0.8) / 2, 1e-9);
  EXPECT_NEAR(py.prefix_rep + py.suffix_rep, 0.0, 1e-9);

  EXPECT_EQ(report.overall.n, 5u);
  EXPECT_NEAR(report.overall.em, 0.2, 1e-9);
  EXPECT_NEAR(report.overall.es, (1.0 + 0.8 + 0.0 + 0.9 + 0.0) / 5, 1e-9);
  EXPECT_NEAR(report.overall.prefix_rep, 0.2, 1e-9);
  EXPECT_NEAR(report.overall.suffix_rep, 0.2, 1e-9);

  auto md = markdown_report(report);
  EXPECT_THAT(md, ::testing::HasSubstr("| Overall | 5 | 20.0 | 54.0 |"));
  EXPECT_THAT(md, ::testing::HasSubstr("| java | 33.3 | 33.3 | 66.7 |"));
}

TEST(RunEval, EndpointFailureRecorded) {
  testing::FakeGenerator fake;
  testing::FlakyEndpoint dead(fake, 1000, false);
  EndpointGenerator gen(dead, RetryPolicy{1, 1});
  auto report = run_eval(benchmark(), gen, {});
  EXPECT_EQ(report.failures, 5u);
  for (const auto& r : report.records) {
    EXPECT_TRUE(r.error);
    EXPECT_EQ(r.generated, "");
    EXPECT_EQ(to_json(r).at("error"), *r.error);
  }
}

TEST(CaseFromJson, Validation) {
  EXPECT_THROW(case_from_json(Json::parse(R"({"id":"a","language":"py","prefix":"","suffix":"","ground_truth":" "})")),
               Error);
  EXPECT_THROW(case_from_json(Json::parse(R"({"id":"a","language":"py"})")), Error);
  auto c = case_from_json(Json::parse(
      R"({"id":7,"language":"py","prefix":"p","suffix":"s","ground_truth":"g","format":"SPM","context":["ctx"]})"));
  EXPECT_EQ(c.id, "7");
  EXPECT_EQ(c.format, FimLayout::SPM);
  ASSERT_EQ(c.context.size(), 1u);
  EXPECT_EQ(c.context[0].text, "ctx");
}

}  // namespace
}  // namespace fimforge
