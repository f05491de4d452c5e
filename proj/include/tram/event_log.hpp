#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace tram::sim
{

/// Append-only JSON-Lines record sequence. Every record carries "t" and
/// "stream"; timestamps must be non-decreasing.
class EventLog
{
public:
  /// With keep_lines false records are checked and hashed but not stored.
  explicit EventLog(bool keep_lines = true) : keep_(keep_lines) {}

  void append(const nlohmann::json& record);

  const std::vector<std::string>& lines() const { return lines_; }
  std::size_t size() const { return count_; }

  /// 64-bit FNV-1a over the serialised bytes, newline included.
  std::uint64_t hash() const { return hash_; }
  std::string hash_hex() const;

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;

private:
  bool keep_;
  std::vector<std::string> lines_;
  std::size_t count_ = 0;
  double last_t_ = -std::numeric_limits<double>::infinity();
  std::uint64_t hash_ = 14695981039346656037ull;
};

} // namespace tram::sim
