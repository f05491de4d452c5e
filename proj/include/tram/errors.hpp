#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tram
{

/// Precondition on an argument failed.
class InvalidInput : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Chainage or index outside the valid domain.
class RangeError : public std::out_of_range
{
public:
  using std::out_of_range::out_of_range;
};

/// Map construction produced an inconsistent network.
class InvalidMap : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Pose too far from the allocated track to be localised on it.
class OffTrackError : public std::runtime_error
{
public:
  OffTrackError(const std::string& what, double lateral) : std::runtime_error(what), lateral_(lateral) {}
  double lateral() const { return lateral_; }

private:
  double lateral_;
};

/// Missing or inconsistent runtime configuration (extrinsics, sensors).
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. Line and column are 1-based; 0 when unknown.
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
    : std::runtime_error(what), line_(line), column_(column)
  {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// Input document violates its schema. Each issue names a JSON path.
class ValidationError : public std::runtime_error
{
public:
  explicit ValidationError(std::vector<std::string> issues)
    : std::runtime_error(join(issues)), issues_(std::move(issues))
  {}
  const std::vector<std::string>& issues() const { return issues_; }

private:
  static std::string join(const std::vector<std::string>& issues)
  {
    std::string out = "validation failed";
    for (const auto& i : issues)
      out += "\n  " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

} // namespace tram
