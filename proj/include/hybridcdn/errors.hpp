#pragma once

#include <stdexcept>
#include <string>

namespace hybridcdn {

// Scenario, cache sizing, or table coverage problem detected before a run.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed report line or CSV input. key() names the offending field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// A data-path hop has no bandwidth share.
class UnreachableSource : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidTranscodeDirection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UndefinedSession : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hybridcdn
