#pragma once

#include <stdexcept>
#include <string>

namespace dha {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally malformed input (missing keys, duplicate fields, bad framing).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PairingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StatsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  IoError(const std::string& what, const std::string& path)
      : std::runtime_error(what + ": " + path), path(path) {}
  std::string path;
};

}  // namespace dha
