#include "fimforge/artifacts.hpp"

#include "fimforge/error.hpp"
#include "fimforge/hashing.hpp"
#include "fimforge/jsonl.hpp"

namespace fs = std::filesystem;

namespace fimforge {

std::string repo_index_jsonl(const IngestResult& result) {
  struct Row {
    std::string path;
    Json j;
  };
  std::vector<Row> rows;
  const auto& repo = result.index.repo_id;
  for (const auto& f : result.scanned) {
    auto drop = result.drop_rule.find(f.path);
    Json j{{"repo_id", repo},
           {"path", f.path},
           {"language", to_string(f.language)},
           {"sha256", sha256_hex(f.content)},
           {"line_count", f.line_count},
           {"byte_count", f.byte_count},
           {"dropped", drop != result.drop_rule.end()},
           {"drop_rule", drop != result.drop_rule.end() ? Json(drop->second) : Json(nullptr)}};
    rows.push_back({f.path, std::move(j)});
  }
  for (const auto& s : result.index.skipped) {
    if (!s.sha256 || !s.language) continue;  // unreadable files have nothing to hash
    Json j{{"repo_id", repo},
           {"path", s.path},
           {"language", to_string(*s.language)},
           {"sha256", *s.sha256},
           {"line_count", nullptr},
           {"byte_count", s.byte_count},
           {"dropped", true},
           {"drop_rule", "ingest:" + s.reason}};
    rows.push_back({s.path, std::move(j)});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.path < b.path; });
  std::string out;
  for (const auto& r : rows) out += json_line(r.j);
  return out;
}

std::string corpus_jsonl(const RepoIndex& index) {
  std::string out;
  for (const auto& f : index.files)
    out += json_line(Json{{"repo_id", f.repo_id}, {"path", f.path}, {"language", to_string(f.language)},
                          {"content", f.content}});
  return out;
}

std::string imports_jsonl(const RepoIndex& index) {
  std::string out;
  for (const auto& e : index.import_edges)
    out += json_line(Json{{"repo_id", index.repo_id},
                          {"from", e.from},
                          {"to", e.to},
                          {"external", e.external},
                          {"module", e.module},
                          {"statement", e.statement}});
  return out;
}

Json filter_report_json(const std::string& repo_id, const FilterReport& report) {
  Json drops = Json::array();
  for (const auto& d : report.drops) drops.push_back(Json{{"rule", d.rule_id}, {"reason", d.reason}, {"dropped", d.dropped}});
  return Json{{"repo_id", repo_id}, {"ingested", report.ingested}, {"retained", report.retained}, {"drops", drops}};
}

std::map<std::string, RepoIndex> load_indexes(const fs::path& corpus, const fs::path& imports) {
  std::map<std::string, RepoIndex> out;
  try {
    for_each_jsonl(corpus, [&](const Json& j) {
      auto repo = j.at("repo_id").get<std::string>();
      auto lang = language_from_name(j.at("language").get<std::string>());
      if (!lang) throw Error("corpus record with unknown language");
      auto& idx = out[repo];
      idx.repo_id = repo;
      idx.files.push_back(SourceFile::make(repo, j.at("path").get<std::string>(), *lang, j.at("content").get<std::string>()));
    });
    for_each_jsonl(imports, [&](const Json& j) {
      auto repo = j.at("repo_id").get<std::string>();
      auto it = out.find(repo);
      if (it == out.end()) throw Error("import edge for unknown repository " + repo);
      it->second.import_edges.push_back({j.at("from").get<std::string>(), j.at("to").get<std::string>(),
                                         j.at("external").get<bool>(), j.value("module", std::string()),
                                         j.value("statement", std::string())});
    });
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed corpus artifact: ") + e.what());
  }
  for (auto& [repo, idx] : out) {
    std::sort(idx.files.begin(), idx.files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
    build_chunk_table(idx);
  }
  return out;
}

std::string samples_jsonl(const std::vector<FimSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += json_line(to_json(s));
  return out;
}

std::vector<FimSample> load_samples(const fs::path& path) {
  std::vector<FimSample> out;
  for_each_jsonl(path, [&](const Json& j) { out.push_back(sample_from_json(j)); });
  return out;
}

std::string pairs_jsonl(const std::vector<PreferencePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += json_line(to_json(p));
  return out;
}

std::vector<PreferencePair> load_pairs(const fs::path& path) {
  std::vector<PreferencePair> out;
  for_each_jsonl(path, [&](const Json& j) { out.push_back(pair_from_json(j)); });
  return out;
}

std::string scores_jsonl(const std::vector<ScoredSample>& scores) {
  std::string out;
  for (const auto& s : scores)
    out += json_line(Json{{"sample_id", s.sample_id},
                          {"token_count", s.token_count},
                          {"sum_logprob", s.sum_logprob},
                          {"ppl", s.ppl}});
  return out;
}

std::vector<ScoredSample> load_scores(const fs::path& path) {
  std::vector<ScoredSample> out;
  for_each_jsonl(path, [&](const Json& j) {
    out.push_back({j.at("sample_id").get<std::string>(), j.at("token_count").get<std::size_t>(),
                   j.at("sum_logprob").get<double>(), j.at("ppl").get<double>()});
  });
  return out;
}

std::string curriculum_jsonl(const std::vector<CurriculumEntry>& entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    out += json_line(Json{{"rank", i + 1},
                          {"sample_id", e.sample_id},
                          {"identifier_count", e.identifier_count},
                          {"pool", e.pool},
                          {"pool_rank", e.pool_rank}});
  }
  return out;
}

}  // namespace fimforge
