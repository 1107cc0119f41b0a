#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shelldrag {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable tag used by the command-line front end.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string& what)
    : std::runtime_error(what), kind_(std::move(kind))
  {
  }

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// A domain value violates its invariants (negative length, R_x < R_y, ...).
class InvalidArgument : public Error
{
public:
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

/// Beam contact trails its base in the direction of travel.
class InconsistentContact : public Error
{
public:
  explicit InconsistentContact(const std::string& what) : Error("inconsistent_contact", what) {}
};

/// Malformed input file; `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error
{
public:
  ParseError(std::string kind, std::size_t line, const std::string& what)
    : Error(std::move(kind), line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line), message_(what)
  {
  }

  std::size_t line() const noexcept { return line_; }
  /// The description without the line prefix.
  const std::string& message() const noexcept { return message_; }

private:
  std::size_t line_;
  std::string message_;
};

/// Calibration data does not excite every output axis (rank-deficient design).
class DegenerateExcitation : public Error
{
public:
  explicit DegenerateExcitation(const std::string& what) : Error("degenerate_excitation", what) {}
};

/// A metric is undefined for the given trial (zero velocity, empty window).
class UndefinedMetric : public Error
{
public:
  explicit UndefinedMetric(const std::string& what) : Error("undefined_metric", what) {}
};

/// Configuration key missing, unknown, or out of range.
class ConfigError : public Error
{
public:
  ConfigError(std::string key, const std::string& what)
    : Error("config", key + ": " + what), key_(std::move(key))
  {
  }

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace shelldrag
