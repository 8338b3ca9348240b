#pragma once

#include <stdexcept>
#include <string>

namespace fimforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: unknown node kinds, bad thresholds, malformed rule files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A stage was started without the artifact an earlier stage produces.
class MissingStageInput : public Error {
 public:
  using Error::Error;
};

/// Transport or protocol failure talking to a model endpoint.
class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, bool transient) : Error(what), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

}  // namespace fimforge
