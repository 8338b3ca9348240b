#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "fimforge/endpoint.hpp"
#include "fimforge/error.hpp"
#include "fimforge/hashing.hpp"
#include "fimforge/rng.hpp"
#include "fimforge/text.hpp"

namespace fimforge::testing {

inline std::uint64_t seed_of(std::string_view s) { return std::stoull(sha256_hex(s).substr(0, 15), nullptr, 16); }

// Log-probabilities that depend only on the request, one per 4-byte piece of the completion.
class FakeScorer : public Endpoint {
 public:
  Json call(const Json& request) override {
    ++calls;
    auto prompt = request.at("prompt").get<std::string>();
    auto completion = request.at("completion").get<std::string>();
    Rng rng(seed_of(prompt + '\x1f' + completion));
    Json tokens = Json::array(), logprobs = Json::array();
    const double scale = 0.2 + 2.0 * rng.unit();
    for (std::size_t i = 0; i < std::max<std::size_t>(completion.size(), 1); i += 4) {
      tokens.push_back(completion.substr(i, 4));
      logprobs.push_back(-scale * (0.25 + rng.unit()));
    }
    return Json{{"tokens", tokens}, {"logprobs", logprobs}};
  }
  std::atomic<int> calls{0};
};

// Completions assembled from prompt lines, with empties and repeats mixed in.
class FakeGenerator : public Endpoint {
 public:
  Json call(const Json& request) override {
    ++calls;
    auto prompt = request.at("prompt").get<std::string>();
    auto n = request.value("n", std::size_t{1});
    Rng rng(seed_of(prompt));
    std::vector<std::string> lines;
    for (const auto& l : text::split_lines(prompt)) {
      auto line = prompt.substr(l.begin, l.end - l.begin);
      if (!text::trim(line).empty() && line.find('<') == std::string::npos) lines.push_back(line);
    }
    Json out = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
      auto roll = rng.index(10);
      if (roll == 0 || lines.empty())
        out.push_back("");
      else if (roll == 1 && !out.empty())
        out.push_back(out.back());
      else
        out.push_back(lines[rng.index(lines.size())] + (roll > 6 ? "\n" + lines[rng.index(lines.size())] : ""));
    }
    return Json{{"completions", out}};
  }
  std::atomic<int> calls{0};
};

// Fails the first `failures` calls with the given kind of error.
class FlakyEndpoint : public Endpoint {
 public:
  FlakyEndpoint(Endpoint& inner, int failures, bool transient) : inner_(inner), left_(failures), transient_(transient) {}
  Json call(const Json& request) override {
    if (left_-- > 0) throw EndpointError("injected failure", transient_);
    return inner_.call(request);
  }

 private:
  Endpoint& inner_;
  std::atomic<int> left_;
  bool transient_;
};

}  // namespace fimforge::testing
