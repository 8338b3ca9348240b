#include "fimforge/sample.hpp"

#include "fimforge/error.hpp"
#include "fimforge/hashing.hpp"

namespace fimforge {

std::string_view to_string(ContextChannel c) { return c == ContextChannel::bm25 ? "bm25" : "dependency"; }

std::optional<ContextChannel> channel_from_name(std::string_view name) {
  if (name == "bm25") return ContextChannel::bm25;
  if (name == "dependency") return ContextChannel::dependency;
  return std::nullopt;
}

std::string sample_id(std::string_view repo_id, std::string_view path, std::string_view prefix,
                      std::string_view middle, std::string_view suffix) {
  // length-prefixed fields so boundaries cannot shift between parts
  std::string buf;
  buf.reserve(prefix.size() + middle.size() + suffix.size() + 128);
  for (auto part : {repo_id, path, prefix, middle, suffix}) {
    buf += std::to_string(part.size());
    buf += ':';
    buf += part;
  }
  return sha256_hex(buf).substr(0, 24);
}

Json to_json(const ContextSnippet& s) {
  Json j;
  j["source_path"] = s.source_path;
  j["channel"] = to_string(s.channel);
  j["text"] = s.text;
  j["score"] = s.score ? Json(*s.score) : Json(nullptr);
  j["token_cost"] = s.token_cost;
  return j;
}

ContextSnippet snippet_from_json(const Json& j) {
  ContextSnippet s;
  s.source_path = j.at("source_path").get<std::string>();
  auto ch = channel_from_name(j.at("channel").get<std::string>());
  if (!ch) throw Error("unknown context channel");
  s.channel = *ch;
  s.text = j.at("text").get<std::string>();
  if (j.contains("score") && !j["score"].is_null()) s.score = j["score"].get<double>();
  s.token_cost = j.value("token_cost", std::size_t{0});
  return s;
}

Json to_json(const FimSample& s) {
  Json j;
  j["id"] = s.id;
  j["repo_id"] = s.repo_id;
  j["path"] = s.path;
  j["language"] = to_string(s.language);
  j["strategy"] = to_string(s.strategy);
  j["prefix"] = s.prefix;
  j["middle"] = s.middle;
  j["suffix"] = s.suffix;
  Json ctx = Json::array();
  for (const auto& c : s.context) ctx.push_back(to_json(c));
  j["context"] = std::move(ctx);
  j["meta"] = s.meta;
  return j;
}

FimSample sample_from_json(const Json& j) {
  try {
    FimSample s;
    s.id = j.at("id").get<std::string>();
    s.repo_id = j.value("repo_id", std::string());
    s.path = j.at("path").get<std::string>();
    auto lang = language_from_name(j.at("language").get<std::string>());
    if (!lang) throw Error("unknown language in sample " + s.id);
    s.language = *lang;
    auto strat = strategy_from_name(j.at("strategy").get<std::string>());
    if (!strat) throw Error("unknown strategy in sample " + s.id);
    s.strategy = *strat;
    s.prefix = j.at("prefix").get<std::string>();
    s.middle = j.at("middle").get<std::string>();
    s.suffix = j.at("suffix").get<std::string>();
    if (j.contains("context"))
      for (const auto& c : j["context"]) s.context.push_back(snippet_from_json(c));
    if (j.contains("meta")) s.meta = j["meta"];
    return s;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed sample record: ") + e.what());
  }
}

}  // namespace fimforge
