#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "fimforge/syntax.hpp"
#include "fimforge/text.hpp"
#include "support/test_support.hpp"

namespace fimforge {
namespace {

using ::testing::ElementsAre;
using testing::fixture;
using testing::slurp;

TEST(Parse, RootSpansWholeFile) {
  std::string src = "a = 1";
  auto t = parse(Language::python, src);
  EXPECT_EQ(t.node(t.root()).span, (ByteSpan{0, 5}));
  EXPECT_FALSE(t.has_errors());
}

TEST(Parse, EmptyFile) {
  std::string src;
  auto t = parse(Language::java, src);
  EXPECT_EQ(t.node(t.root()).span, (ByteSpan{0, 0}));
  EXPECT_TRUE(t.named_children(t.root()).empty());
}

TEST(Parse, UnbalancedBraceFlagsErrors) {
  std::string src = "class A {\n  void f() {\n    int x = 1;\n}\n";
  auto t = parse(Language::java, src);
  EXPECT_TRUE(t.has_errors());
  EXPECT_FALSE(t.error_regions().empty());
}

// Children lie inside parents, siblings are ordered, and leaves plus the gaps
// between them give back the source.
void expect_well_formed(const SyntaxTree& t) {
  std::string rebuilt;
  std::uint32_t cursor = 0;
  for (NodeId id = 0; id < t.size(); ++id) {
    const auto& n = t.node(id);
    ASSERT_LE(n.span.start, n.span.end);
    std::uint32_t prev_end = n.span.start;
    for (NodeId c : t.children(id)) {
      const auto& cn = t.node(c);
      ASSERT_TRUE(n.span.contains(cn.span)) << n.kind << " / " << cn.kind;
      ASSERT_GE(cn.span.start, prev_end);
      prev_end = cn.span.end;
    }
    if (t.children(id).empty() && n.span.length() > 0) {
      ASSERT_GE(n.span.start, cursor);
      rebuilt += t.source().substr(cursor, n.span.start - cursor);
      rebuilt += t.text(id);
      cursor = n.span.end;
    }
  }
  rebuilt += t.source().substr(cursor);
  EXPECT_EQ(rebuilt, t.source());
}

TEST(Parse, SpansReconstructEveryFixtureFile) {
  for (const auto& entry : std::filesystem::recursive_directory_iterator(fixture("repos/polyglot"))) {
    if (!entry.is_regular_file()) continue;
    auto lang = language_for_path(entry.path().string(), default_extension_map());
    if (!lang) continue;
    SCOPED_TRACE(entry.path().string());
    auto src = slurp(entry.path());
    auto t = parse(*lang, src);
    EXPECT_FALSE(t.has_errors());
    expect_well_formed(t);
  }
}

TEST(Parse, RepeatedParsesAgree) {
  auto src = slurp(fixture("repos/polyglot/java/src/com/acme/geo/Polygon.java"));
  auto a = parse(Language::java, src);
  auto b = parse(Language::java, src);
  ASSERT_EQ(a.size(), b.size());
  for (NodeId id = 0; id < a.size(); ++id) {
    EXPECT_EQ(a.node(id).span, b.node(id).span);
    EXPECT_EQ(a.node(id).kind, b.node(id).kind);
  }
  EXPECT_EQ(count_identifiers(a), count_identifiers(b));
}

TEST(SelectNodes, TwoJavaMethods) {
  auto src = slurp(fixture("files/TwoMethods.java"));
  auto t = parse(Language::java, src);
  auto nodes = select_nodes(t, selector_for(Language::java, Strategy::methods));
  ASSERT_EQ(nodes.size(), 2u);
  EXPECT_TRUE(src.substr(nodes[0].span.start, nodes[0].span.length()).starts_with("void increment()"));
  EXPECT_TRUE(src.substr(nodes[1].span.start, nodes[1].span.length()).starts_with("int value()"));
}

TEST(SelectNodes, DisjointKindsGiveNothing) {
  std::string src = "x = 1\ny = x + 2\n";
  auto t = parse(Language::python, src);
  EXPECT_TRUE(select_nodes(t, selector_for(Language::python, Strategy::loops)).empty());
}

TEST(SelectNodes, SizeBoundExcludesHugeNode) {
  std::string src = "def big():\n";
  while (src.size() < 12000) src += "    value = compute_something(1, 2, 3) + other_thing(4)\n";
  auto t = parse(Language::python, src);
  auto sel = selector_for(Language::python, Strategy::methods);
  EXPECT_TRUE(select_nodes(t, sel, {1, 4096}).empty());
  EXPECT_EQ(select_nodes(t, sel, {1, 20000}).size(), 1u);
}

TEST(SelectNodes, SkipsErrorRegions) {
  std::string src = "def ok():\n    return 1\n\ndef broken(:\n    return (\n";
  auto t = parse(Language::python, src);
  ASSERT_TRUE(t.has_errors());
  for (const auto& n : select_nodes(t, selector_for(Language::python, Strategy::return_statements)))
    for (const auto& e : t.error_regions())
      EXPECT_TRUE(n.span.end <= e.start || n.span.start >= e.end);
}

TEST(NodeSelector, BuiltinTablesValidate) {
  for (auto lang : kAllLanguages)
    for (auto s : kAllStrategies)
      if (is_ast_strategy(s)) EXPECT_NO_THROW(selector_for(lang, s).validate());
}

TEST(NodeSelector, UnknownKindRejected) {
  NodeSelector sel{Language::go, Strategy::loops, {"for_statement", "no_such_kind"}};
  EXPECT_THROW(sel.validate(), ConfigError);
}

// Re-parsing a selected expression on its own yields a node with the same text.
TEST(SelectNodes, ExpressionSpansReparse) {
  auto src = slurp(fixture("repos/polyglot/shop/pricing.py"));
  auto t = parse(Language::python, src);
  auto nodes = select_nodes(t, selector_for(Language::python, Strategy::call_expressions));
  ASSERT_FALSE(nodes.empty());
  for (const auto& n : nodes) {
    std::string piece = src.substr(n.span.start, n.span.length());
    if (piece.find('\n') != std::string::npos) continue;
    auto again = parse(Language::python, piece);
    bool found = false;
    for (NodeId id = 0; id < again.size(); ++id)
      found |= again.node(id).kind == t.node(n.id).kind && again.text(id) == piece;
    EXPECT_TRUE(found) << piece;
  }
}

TEST(CountIdentifiers, EmptyFile) {
  std::string src;
  EXPECT_EQ(count_identifiers(parse(Language::cpp, src)), 0u);
}

TEST(CountIdentifiers, SimpleDeclarationHasThree) {
  auto src = slurp(fixture("files/decl.cpp"));
  EXPECT_EQ(count_identifiers(parse(Language::cpp, src)), 3u);
}

TEST(CountIdentifiers, AdditiveOverConcatenation) {
  auto a = slurp(fixture("repos/polyglot/shop/pricing.py"));
  auto b = slurp(fixture("repos/polyglot/shop/models.py"));
  auto ab = a + b;
  EXPECT_EQ(count_identifiers(parse(Language::python, ab)),
            count_identifiers(parse(Language::python, a)) + count_identifiers(parse(Language::python, b)));
}

TEST(CountIdentifiers, JavaCountsTypeIdentifiers) {
  std::string src = "class A { B b; }";
  // A, B (type_identifier) and b
  EXPECT_EQ(count_identifiers(parse(Language::java, src)), 3u);
}

struct GoldenCase {
  const char* source;
  const char* golden;
};

class SkeletonGolden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(SkeletonGolden, MatchesGoldenFile) {
  auto path = fixture(GetParam().source);
  auto src = slurp(path);
  auto lang = language_for_path(path.string(), default_extension_map());
  ASSERT_TRUE(lang);
  EXPECT_EQ(extract_skeleton(parse(*lang, src)), slurp(fixture(GetParam().golden)));
}

TEST_P(SkeletonGolden, Idempotent) {
  auto path = fixture(GetParam().source);
  auto lang = language_for_path(path.string(), default_extension_map());
  auto once = extract_skeleton(parse(*lang, slurp(path)));
  EXPECT_EQ(extract_skeleton(parse(*lang, once)), once);
}

INSTANTIATE_TEST_SUITE_P(
    Fixtures, SkeletonGolden,
    ::testing::Values(GoldenCase{"skeleton/documented.py", "skeleton/documented.py.skel"},
                      GoldenCase{"skeleton/Shapes.java", "skeleton/Shapes.java.skel"},
                      GoldenCase{"repos/polyglot/java/src/com/acme/geo/Point.java", "skeleton/polyglot_Point.java.skel"},
                      GoldenCase{"repos/polyglot/shop/models.py", "skeleton/polyglot_models.py.skel"},
                      GoldenCase{"repos/polyglot/cpp/include/ring_buffer.hpp", "skeleton/polyglot_ring_buffer.hpp.skel"},
                      GoldenCase{"repos/polyglot/ts/src/queue.ts", "skeleton/polyglot_queue.ts.skel"},
                      GoldenCase{"repos/polyglot/go/store/store.go", "skeleton/polyglot_store.go.skel"},
                      GoldenCase{"repos/polyglot/web/lib/format.js", "skeleton/polyglot_format.js.skel"}));

TEST(Skeleton, DocumentedPythonFunction) {
  std::string src = slurp(fixture("skeleton/documented.py"));
  EXPECT_EQ(extract_skeleton(parse(Language::python, src)), "def f(x):\n    \"\"\"Return x doubled.\"\"\"\n    ...\n");
}

TEST(Skeleton, NoDeclarationsGivesEmpty) {
  auto src = slurp(fixture("skeleton/no_decls.py"));
  EXPECT_EQ(extract_skeleton(parse(Language::python, src)), "");
}

TEST(Skeleton, JavaClassHeaderAndThreeSignatures) {
  auto skel = extract_skeleton(parse(Language::java, slurp(fixture("skeleton/Shapes.java"))));
  std::vector<std::string> sigs;
  for (const auto& l : text::split_lines(skel)) {
    auto line = std::string(text::trim(std::string_view(skel).substr(l.begin, l.end - l.begin)));
    if (line.ends_with("{ /* ... */ }")) sigs.push_back(line);
  }
  EXPECT_THAT(sigs, ElementsAre("public int area() { /* ... */ }", "public int perimeter() { /* ... */ }",
                                "public boolean isSquare() { /* ... */ }"));
  EXPECT_EQ(skel.find("return"), std::string::npos);
  EXPECT_NE(skel.find("public class Rect {"), std::string::npos);
}

TEST(Skeleton, ErrorRegionsSkipped) {
  std::string src = "def good(a):\n    return a\n\ndef bad(:\n    pass\n";
  auto skel = extract_skeleton(parse(Language::python, src));
  EXPECT_NE(skel.find("def good(a):"), std::string::npos);
  EXPECT_EQ(skel.find("bad"), std::string::npos);
}

TEST(Imports, PythonFromImport) {
  std::string src = "from b import f\nimport os, sys as system\n";
  auto refs = extract_imports(parse(Language::python, src));
  ASSERT_EQ(refs.size(), 3u);
  EXPECT_EQ(refs[0].module, "b");
  EXPECT_THAT(refs[0].names, ElementsAre("f"));
  EXPECT_EQ(refs[1].module, "os");
  EXPECT_EQ(refs[2].module, "sys");
}

TEST(Imports, CppIncludeKinds) {
  std::string src = "#include <vector>\n#include \"a/b.hpp\"\n";
  auto refs = extract_imports(parse(Language::cpp, src));
  ASSERT_EQ(refs.size(), 2u);
  EXPECT_TRUE(refs[0].system);
  EXPECT_EQ(refs[1].module, "a/b.hpp");
  EXPECT_FALSE(refs[1].system);
}

}  // namespace
}  // namespace fimforge
