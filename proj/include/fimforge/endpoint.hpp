#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "fimforge/sample.hpp"

namespace fimforge {

/// JSON request/response exchange with a model server.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  /// Throws EndpointError; transient() marks failures worth retrying.
  virtual Json call(const Json& request) = 0;
};

struct EndpointSettings {
  std::string url;  // http(s)://host[:port]/path
  std::string api_key;
  int timeout_seconds = 120;
};

/// Reads `url_var`/`key_var`, falling back to the scorer variables.
EndpointSettings endpoint_settings_from_env(const char* url_var, const char* key_var);

inline constexpr const char* kScorerUrlVar = "FIMFORGE_SCORER_URL";
inline constexpr const char* kScorerKeyVar = "FIMFORGE_SCORER_KEY";
inline constexpr const char* kGeneratorUrlVar = "FIMFORGE_GENERATOR_URL";
inline constexpr const char* kGeneratorKeyVar = "FIMFORGE_GENERATOR_KEY";

class HttpEndpoint final : public Endpoint {
 public:
  explicit HttpEndpoint(EndpointSettings settings);
  Json call(const Json& request) override;

 private:
  EndpointSettings settings_;
  std::string origin_;
  std::string path_;
};

/// Serves responses from `dir`, keyed by SHA-256 of the request body; misses
/// go to `inner` and are stored. Without an inner endpoint a miss throws.
class CachingEndpoint final : public Endpoint {
 public:
  CachingEndpoint(std::filesystem::path dir, std::shared_ptr<Endpoint> inner);
  Json call(const Json& request) override;

  static std::string request_key(const Json& request);
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path dir_;
  std::shared_ptr<Endpoint> inner_;
  std::mutex mutex_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 200;
};

/// Retries transient EndpointErrors with exponential backoff.
Json call_with_retries(Endpoint& endpoint, const Json& request, const RetryPolicy& policy = {});

}  // namespace fimforge
