#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fimforge/language.hpp"
#include "fimforge/strategy.hpp"

namespace fimforge {

using Json = nlohmann::ordered_json;

enum class ContextChannel { bm25, dependency };

std::string_view to_string(ContextChannel c);
std::optional<ContextChannel> channel_from_name(std::string_view name);

struct ContextSnippet {
  std::string source_path;
  ContextChannel channel = ContextChannel::bm25;
  std::string text;
  std::optional<double> score;  // bm25 only
  std::size_t token_cost = 0;

  bool operator==(const ContextSnippet&) const = default;
};

struct FimSample {
  std::string id;
  std::string repo_id;
  std::string path;
  Language language = Language::python;
  Strategy strategy = Strategy::expressions;
  std::string prefix;
  std::string middle;
  std::string suffix;
  std::vector<ContextSnippet> context;
  Json meta = Json::object();
};

/// Content hash over (repo_id, path, prefix, middle, suffix); 24 hex chars.
std::string sample_id(std::string_view repo_id, std::string_view path, std::string_view prefix,
                      std::string_view middle, std::string_view suffix);

Json to_json(const ContextSnippet& s);
ContextSnippet snippet_from_json(const Json& j);
Json to_json(const FimSample& s);
FimSample sample_from_json(const Json& j);

}  // namespace fimforge
