#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "fimforge/endpoint.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "fimforge/error.hpp"
#include "fimforge/hashing.hpp"
#include "fimforge/jsonl.hpp"

namespace fs = std::filesystem;

namespace fimforge {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace

EndpointSettings endpoint_settings_from_env(const char* url_var, const char* key_var) {
  EndpointSettings s;
  s.url = env_or_empty(url_var);
  s.api_key = env_or_empty(key_var);
  if (s.url.empty()) s.url = env_or_empty(kScorerUrlVar);
  if (s.api_key.empty()) s.api_key = env_or_empty(kScorerKeyVar);
  return s;
}

HttpEndpoint::HttpEndpoint(EndpointSettings settings) : settings_(std::move(settings)) {
  const auto& url = settings_.url;
  auto scheme = url.find("://");
  if (url.empty() || scheme == std::string::npos) throw ConfigError("endpoint URL must look like http://host[:port]/path");
  auto slash = url.find('/', scheme + 3);
  origin_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

Json HttpEndpoint::call(const Json& request) {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(settings_.timeout_seconds, 0);
  cli.set_read_timeout(settings_.timeout_seconds, 0);
  cli.set_write_timeout(settings_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);
  auto res = cli.Post(path_, headers, request.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
  if (!res) throw EndpointError("request to " + origin_ + path_ + " failed: " + httplib::to_string(res.error()), true);
  if (res->status == 429 || res->status >= 500)
    throw EndpointError("endpoint returned HTTP " + std::to_string(res->status), true);
  if (res->status < 200 || res->status >= 300)
    throw EndpointError("endpoint returned HTTP " + std::to_string(res->status), false);
  try {
    return Json::parse(res->body);
  } catch (const Json::exception&) {
    throw EndpointError("endpoint response is not JSON", false);
  }
}

CachingEndpoint::CachingEndpoint(fs::path dir, std::shared_ptr<Endpoint> inner)
    : dir_(std::move(dir)), inner_(std::move(inner)) {}

std::string CachingEndpoint::request_key(const Json& request) {
  return sha256_hex(request.dump(-1, ' ', false, Json::error_handler_t::replace));
}

Json CachingEndpoint::call(const Json& request) {
  const auto key = request_key(request);
  const auto file = dir_ / (key + ".json");
  {
    std::lock_guard lock(mutex_);
    if (fs::exists(file)) {
      ++hits_;
      return Json::parse(read_file(file));
    }
    ++misses_;
  }
  if (!inner_) throw EndpointError("no cached response for request " + key + " and no endpoint configured", false);
  Json response = inner_->call(request);
  std::lock_guard lock(mutex_);
  write_file_atomic(file, response.dump(-1, ' ', false, Json::error_handler_t::replace));
  return response;
}

Json call_with_retries(Endpoint& endpoint, const Json& request, const RetryPolicy& policy) {
  for (int attempt = 1;; ++attempt) {
    try {
      return endpoint.call(request);
    } catch (const EndpointError& e) {
      if (!e.transient() || attempt >= policy.max_attempts) throw;
      auto delay = policy.base_delay_ms * (1 << (attempt - 1));
      spdlog::warn("endpoint: {} (attempt {}/{}), retrying in {} ms", e.what(), attempt, policy.max_attempts, delay);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
  }
}

}  // namespace fimforge
