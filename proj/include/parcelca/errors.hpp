#pragma once

#include <stdexcept>
#include <string>

namespace pca {

enum class ErrorKind {
  Geometry,    // degenerate or invalid polygon input
  Schema,      // malformed file content or missing required fields
  Data,        // well-formed input carrying invalid values
  Config,      // bad configuration or parameter value
  Domain,      // argument outside a function's mathematical domain
  Format,      // unreadable or truncated cache/file framing
  StaleCache,  // cached artifact no longer matches its inputs
  State,       // operation invoked on an object missing prepared state
  Io,          // filesystem failure
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Data: return "data";
    case ErrorKind::Config: return "config";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Format: return "format";
    case ErrorKind::StaleCache: return "stale-cache";
    case ErrorKind::State: return "state";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pca
