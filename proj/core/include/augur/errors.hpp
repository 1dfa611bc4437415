#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace augur {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A raw record failed validation. `field()` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error("invalid " + field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Bad configuration, unwritable paths, or misuse of a component.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Base for everything a chat backend can raise.
class BackendError : public Error {
 public:
  using Error::Error;
};

class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class RateLimited : public BackendError {
 public:
  RateLimited(const std::string& message, std::optional<std::chrono::seconds> retry_after)
      : BackendError(message), retry_after_(retry_after) {}

  std::optional<std::chrono::seconds> retry_after() const noexcept { return retry_after_; }

 private:
  std::optional<std::chrono::seconds> retry_after_;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class CassetteMiss : public BackendError {
 public:
  explicit CassetteMiss(std::string fingerprint, const std::string& why = "no recorded response")
      : BackendError("cassette miss for fingerprint " + fingerprint + ": " + why),
        fingerprint_(std::move(fingerprint)) {}

  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  std::string fingerprint_;
};

/// A line-delimited file could not be parsed. `line()` is 1-based.
class FormatError : public Error {
 public:
  FormatError(const std::string& source, std::size_t line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Search or market provider failure (transport, quota, bad payload).
class ProviderError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

class EmptySet : public MetricError {
 public:
  EmptySet() : MetricError("scored set is empty") {}
};

class TooFewForecasts : public MetricError {
 public:
  TooFewForecasts(std::size_t n, std::size_t k)
      : MetricError("calibration needs at least K forecasts (N=" + std::to_string(n) +
                    ", K=" + std::to_string(k) + ")") {}
};

class EmptyMembers : public MetricError {
 public:
  EmptyMembers() : MetricError("cannot aggregate an empty member list") {}
};

class InsufficientMembers : public MetricError {
 public:
  explicit InsufficientMembers(const std::string& question_id)
      : MetricError("ensemble std needs >= 2 forecasts for question " + question_id) {}
};

class UniverseMismatch : public MetricError {
 public:
  using MetricError::MetricError;
};

}  // namespace augur
