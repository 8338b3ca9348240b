#pragma once

// Straightforward reference implementations checked against the library.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace fimforge::testing {

// Full-matrix Levenshtein over code points.
inline std::size_t levenshtein_dp(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

inline std::u32string decode_utf8(const std::string& s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    char32_t cp = len == 1 ? c : len == 2 ? c & 0x1F : len == 3 ? c & 0x0F : c & 0x07;
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline double edit_similarity_oracle(const std::string& a, const std::string& b) {
  auto ua = decode_utf8(a), ub = decode_utf8(b);
  if (ua.empty() && ub.empty()) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_dp(ua, ub)) / static_cast<double>(std::max(ua.size(), ub.size()));
}

// Okapi BM25 of document d against the query's distinct terms, over raw word lists.
inline double okapi(const std::vector<std::vector<std::string>>& docs, std::size_t d,
                    const std::vector<std::string>& query, double k1, double b) {
  const double N = static_cast<double>(docs.size());
  double total = 0;
  for (const auto& doc : docs) total += static_cast<double>(doc.size());
  const double avgdl = total / N;
  std::set<std::string> q(query.begin(), query.end());
  double score = 0;
  for (const auto& t : q) {
    double n = 0;
    for (const auto& doc : docs) n += std::find(doc.begin(), doc.end(), t) != doc.end();
    double f = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
    if (f == 0) continue;
    double idf = std::log(1 + (N - n + 0.5) / (n + 0.5));
    score += idf * f * (k1 + 1) / (f + k1 * (1 - b + b * static_cast<double>(docs[d].size()) / avgdl));
  }
  return score;
}

struct RepetitionCase {
  const char* generated;
  const char* prefix;
  const char* suffix;
  const char* ground_truth;
  const char* expected;  // none, prefix_rep, suffix_rep
};

// Hand-labeled.
inline const std::vector<RepetitionCase>& repetition_cases() {
  static const std::vector<RepetitionCase> cases = {
      {"return x", "def f():\n    ", "\n    return x\n", "x = 1", "suffix_rep"},
      {"return x", "def f():\n    ", "\nreturn x\n", "return x", "none"},
      {"   \n\t\n", "a = 1\n", "\nb = 2\n", "c = 3", "none"},
      {"", "a = 1\n", "\nb = 2\n", "c = 3", "none"},
      {"b = 2", "a = 1\nb = 2\n", "\nd = 4\n", "c = 3", "prefix_rep"},
      {"same()", "same()\n", "\nsame()\n", "other()", "suffix_rep"},
      {"a = 1", "a = 1\n", "\nz\n", "a = 1", "none"},
      {"return  x", "p\n", "\nreturn x\n", "y", "suffix_rep"},
      {"returnx", "p\n", "\nreturn x\n", "y", "suffix_rep"},
      {"\n\n   return x\nfoo", "p\n", "\nreturn x\n", "y", "suffix_rep"},
      {"y = 2", "p\n", "\n\n  y = 2\n", "q", "suffix_rep"},
      {")", "x = foo(", ")\nbar()\n", "a, b", "suffix_rep"},
      {"x = foo(", "x = foo(", ")\n", "a, b", "prefix_rep"},
      {"b", "a\nb\n\n  \n", "\nc\n", "d", "prefix_rep"},
      {"z = 9\nreturn x", "p\n", "\nreturn x\n", "y", "none"},
      {"unrelated()", "p\n", "\ns\n", "y", "none"},
      {"if a:\n    pass", "p\n", "\ns\n", "if a:\n    return 1", "none"},
      {"y", "p\n", "\ns\n", "\n  y\n", "none"},
      {"\treturn\tx", "p\n", "\nreturn x\n", "y", "suffix_rep"},
      {"return x\r\n", "p\n", "\nreturn x\r\n", "y", "suffix_rep"},
      {"a", "", "", "b", "none"},
      {"a", "a\n", "\n   \n", "b", "prefix_rep"},
      {" a=1", "a = 1\n", "\ns\n", "a = 1", "none"},
      {"Return x", "p\n", "\nreturn x\n", "y", "none"},
      {"return x;", "p\n", "\nreturn x\n", "y", "none"},
      {"close()", "p\n", "\nclose()\n", "close()\nopen()", "none"},
      {"k += 1", "k += 1\n", "\nk += 1\n", "k -= 1", "suffix_rep"},
      {"naïve = 1", "p\n", "\nnaïve = 1\n", "naive = 1", "suffix_rep"},
      {"  \n  total = 0", "total = 0\n", "\nreturn total\n", "total = 1", "prefix_rep"},
      {"}", "i++;\n", "\n}\n", "}", "none"},
  };
  return cases;
}

}  // namespace fimforge::testing
