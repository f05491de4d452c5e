#include "tram/event_log.hpp"

#include <cstdio>
#include <fstream>

#include "tram/errors.hpp"

namespace tram::sim
{

void EventLog::append(const nlohmann::json& record)
{
  if (!record.contains("t") || !record.at("t").is_number() || !record.contains("stream"))
    throw InvalidInput("event record needs numeric 't' and 'stream'");
  const double t = record.at("t").get<double>();
  if (t < last_t_)
    throw InvalidInput("event log timestamps must be non-decreasing");
  last_t_ = t;

  std::string line = record.dump();
  line.push_back('\n');
  for (unsigned char c : line)
  {
    hash_ ^= c;
    hash_ *= 1099511628211ull;
  }
  ++count_;
  if (keep_)
    lines_.push_back(std::move(line));
}

std::string EventLog::hash_hex() const
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
  return buf;
}

void EventLog::write(std::ostream& out) const
{
  for (const auto& l : lines_)
    out << l;
}

void EventLog::write(const std::filesystem::path& path) const
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  write(out);
}

} // namespace tram::sim
