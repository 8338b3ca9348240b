#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

#include "fimforge/endpoint.hpp"
#include "fimforge/preference.hpp"
#include "fimforge/quality.hpp"
#include "support/fake_endpoints.hpp"
#include "support/test_support.hpp"

namespace fimforge {
namespace {

// Local server answering POST /v1/score; the first `fail_first` calls get `fail_status`.
class LocalServer {
 public:
  LocalServer() {
    server_.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      if (fail_first-- > 0) {
        res.status = fail_status;
        return;
      }
      if (garbage) {
        res.set_content("not json", "text/plain");
        return;
      }
      Json::parse(req.body);  // throws on a malformed request
      res.set_content(Json{{"tokens", {"a", "b"}}, {"logprobs", {-0.5, -1.5}}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/score"; }

  std::atomic<int> calls{0};
  std::atomic<int> fail_first{0};
  int fail_status = 503;
  bool garbage = false;
  std::string last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpEndpoint, ScorerWireFormat) {
  LocalServer server;
  HttpEndpoint http({server.url(), "sekrit", 5});
  EndpointScorer scorer(http);
  auto r = scorer.score("<fim_prefix>a", "b + c");
  EXPECT_THAT(r.logprobs, ::testing::ElementsAre(-0.5, -1.5));
  auto body = Json::parse(server.last_body);
  EXPECT_EQ(body.at("prompt"), "<fim_prefix>a");
  EXPECT_EQ(body.at("completion"), "b + c");
  EXPECT_EQ(body.at("echo_logprobs"), true);
  EXPECT_EQ(server.last_auth, "Bearer sekrit");
}

TEST(HttpEndpoint, RetriesServerErrors) {
  LocalServer server;
  server.fail_first = 2;
  HttpEndpoint http({server.url(), "", 5});
  EndpointScorer scorer(http, RetryPolicy{3, 1});
  EXPECT_NO_THROW(scorer.score("p", "c"));
  EXPECT_EQ(server.calls, 3);
}

TEST(HttpEndpoint, GivesUpAfterMaxAttempts) {
  LocalServer server;
  server.fail_first = 10;
  HttpEndpoint http({server.url(), "", 5});
  try {
    call_with_retries(http, Json{{"prompt", "p"}}, RetryPolicy{3, 1});
    FAIL();
  } catch (const EndpointError& e) {
    EXPECT_TRUE(e.transient());
  }
  EXPECT_EQ(server.calls, 3);
}

TEST(HttpEndpoint, ClientErrorsAreNotRetried) {
  LocalServer server;
  server.fail_first = 10;
  server.fail_status = 400;
  HttpEndpoint http({server.url(), "", 5});
  try {
    call_with_retries(http, Json{{"prompt", "p"}}, RetryPolicy{3, 1});
    FAIL();
  } catch (const EndpointError& e) {
    EXPECT_FALSE(e.transient());
  }
  EXPECT_EQ(server.calls, 1);
}

TEST(HttpEndpoint, NonJsonBody) {
  LocalServer server;
  server.garbage = true;
  HttpEndpoint http({server.url(), "", 5});
  EXPECT_THROW(http.call(Json{{"prompt", "p"}}), EndpointError);
}

TEST(HttpEndpoint, UnreachableIsTransient) {
  std::string url;
  {
    LocalServer gone;
    url = gone.url();
  }
  HttpEndpoint http({url, "", 1});
  try {
    http.call(Json::object());
    FAIL();
  } catch (const EndpointError& e) {
    EXPECT_TRUE(e.transient());
  }
}

TEST(HttpEndpoint, BadUrl) { EXPECT_THROW(HttpEndpoint({"localhost:80", "", 1}), ConfigError); }

TEST(CachingEndpoint, StoresAndReplays) {
  testing::TempDir dir;
  auto fake = std::make_shared<testing::FakeScorer>();
  CachingEndpoint cache(dir.path(), fake);
  Json req{{"prompt", "p"}, {"completion", "c"}, {"echo_logprobs", true}};
  auto first = cache.call(req);
  auto second = cache.call(req);
  EXPECT_EQ(first, second);
  EXPECT_EQ(fake->calls, 1);
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.misses(), 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / (CachingEndpoint::request_key(req) + ".json")));

  CachingEndpoint offline(dir.path(), nullptr);
  EXPECT_EQ(offline.call(req), first);
  EXPECT_THROW(offline.call(Json{{"prompt", "other"}}), EndpointError);
}

TEST(CachingEndpoint, KeyDependsOnWholeRequest) {
  EXPECT_NE(CachingEndpoint::request_key(Json{{"n", 1}}), CachingEndpoint::request_key(Json{{"n", 2}}));
  EXPECT_EQ(CachingEndpoint::request_key(Json{{"n", 1}}), CachingEndpoint::request_key(Json{{"n", 1}}));
}

TEST(EndpointSettings, GeneratorFallsBackToScorerVariables) {
  ::setenv(kScorerUrlVar, "http://scorer:1/x", 1);
  ::setenv(kScorerKeyVar, "k1", 1);
  ::unsetenv(kGeneratorUrlVar);
  ::unsetenv(kGeneratorKeyVar);
  auto s = endpoint_settings_from_env(kGeneratorUrlVar, kGeneratorKeyVar);
  EXPECT_EQ(s.url, "http://scorer:1/x");
  EXPECT_EQ(s.api_key, "k1");
  ::setenv(kGeneratorUrlVar, "http://gen:2/y", 1);
  EXPECT_EQ(endpoint_settings_from_env(kGeneratorUrlVar, kGeneratorKeyVar).url, "http://gen:2/y");
  for (auto v : {kScorerUrlVar, kScorerKeyVar, kGeneratorUrlVar}) ::unsetenv(v);
}

TEST(EndpointGenerator, RequestShape) {
  class Capture : public Endpoint {
   public:
    Json call(const Json& r) override {
      last = r;
      return Json{{"completions", {"x", "y"}}};
    }
    Json last;
  } cap;
  EndpointGenerator gen(cap);
  auto out = gen.generate("prompt", 2, 1.0, 64);
  EXPECT_THAT(out, ::testing::ElementsAre("x", "y"));
  EXPECT_EQ(cap.last.at("n"), 2);
  EXPECT_EQ(cap.last.at("temperature"), 1.0);
  EXPECT_EQ(cap.last.at("max_tokens"), 64);
  EXPECT_EQ(cap.last.at("echo_logprobs"), false);
}

}  // namespace
}  // namespace fimforge
