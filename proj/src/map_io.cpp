#include "tram/map_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "tram/errors.hpp"

namespace tram::map
{

using nlohmann::json;

namespace
{

std::string trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_field(const std::string& text, std::size_t line, std::size_t column)
{
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value))
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": expected a number, got '" +
                       t + "'",
                     line, column);
  return value;
}

/// Collects schema issues so a document reports every problem at once.
struct Issues
{
  std::vector<std::string> list;
  void add(const std::string& path, const std::string& what) { list.push_back(path + ": " + what); }
};

std::optional<double> number_at(const json& j, const char* key, const std::string& path, Issues& issues,
                                bool required = true)
{
  if (!j.contains(key))
  {
    if (required)
      issues.add(path + "." + key, "missing");
    return std::nullopt;
  }
  if (!j.at(key).is_number())
  {
    issues.add(path + "." + key, "expected number");
    return std::nullopt;
  }
  return j.at(key).get<double>();
}

std::vector<signal::SignalState> states_at(const json& j, const char* key, const std::string& path, Issues& issues)
{
  std::vector<signal::SignalState> out;
  if (!j.contains(key))
    return out;
  if (!j.at(key).is_array())
  {
    issues.add(path + "." + key, "expected array of signal states");
    return out;
  }
  for (std::size_t i = 0; i < j.at(key).size(); ++i)
  {
    const auto& v = j.at(key)[i];
    const auto parsed = v.is_string() ? signal::parse_signal_state(v.get<std::string>()) : std::nullopt;
    if (!parsed)
      issues.add(path + "." + key + "[" + std::to_string(i) + "]", "unknown signal state");
    else
      out.push_back(*parsed);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

json states_to_json(const std::vector<signal::SignalState>& states)
{
  json arr = json::array();
  for (auto s : states)
    arr.push_back(std::string(signal::to_string(s)));
  return arr;
}

std::vector<Point2d> points_from_json(const json& j, const std::string& path, Issues& issues)
{
  std::vector<Point2d> pts;
  if (!j.is_array())
  {
    issues.add(path, "expected array of [x, y] pairs");
    return pts;
  }
  for (std::size_t i = 0; i < j.size(); ++i)
  {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      issues.add(path + "[" + std::to_string(i) + "]", "expected [x, y]");
    else
      pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

} // namespace

std::vector<Point2d> read_trajectory_csv(std::istream& in)
{
  std::vector<Point2d> pts;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line))
  {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty())
      continue;
    if (!header_seen)
    {
      if (t != "x_m,y_m")
        throw ParseError("line " + std::to_string(line_no) + ", column 1: expected header 'x_m,y_m'", line_no, 1);
      header_seen = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
      throw ParseError("line " + std::to_string(line_no) + ", column 1: expected two comma-separated fields", line_no,
                       1);
    const double x = parse_field(t.substr(0, comma), line_no, 1);
    const double y = parse_field(t.substr(comma + 1), line_no, comma + 2);
    pts.emplace_back(x, y);
  }
  if (!header_seen)
    throw ParseError("empty trajectory file", 0);
  return pts;
}

std::vector<Point2d> read_trajectory_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open " + path.string(), 0);
  return read_trajectory_csv(in);
}

std::vector<InfrastructureElement> elements_from_json(const json& j, const signal::StopCommitConfig& defaults,
                                                      const std::string& path)
{
  Issues issues;
  std::vector<InfrastructureElement> out;
  if (!j.is_array())
    throw ValidationError({path + ": expected array of elements"});

  for (std::size_t i = 0; i < j.size(); ++i)
  {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& e = j[i];
    if (!e.is_object())
    {
      issues.add(p, "expected object");
      continue;
    }
    InfrastructureElement el;
    el.id = e.value("id", std::string{});
    const auto kind = e.contains("kind") && e["kind"].is_string() ? parse_element_kind(e["kind"].get<std::string>())
                                                                  : std::nullopt;
    if (!kind)
    {
      issues.add(p + ".kind", "expected one of Platform, Signal, RoadCrossing, PedestrianCrossing, SpeedLimit, "
                              "GridSeparator");
      continue;
    }
    el.kind = *kind;
    const auto s0 = number_at(e, "s_start", p, issues);
    const auto s1 = number_at(e, "s_end", p, issues, false);
    // keep going without s_start so the kind-specific fields are checked too
    el.s_start = s0.value_or(0.0);
    el.s_end = s1.value_or(el.s_start);

    switch (el.kind)
    {
    case ElementKind::Platform: {
      const auto stop = number_at(e, "stop_point_s", p, issues);
      el.attributes = PlatformInfo{stop.value_or(el.s_end)};
      break;
    }
    case ElementKind::SpeedLimit: {
      const auto lim = number_at(e, "limit", p, issues);
      el.attributes = SpeedLimitInfo{lim.value_or(0.0)};
      break;
    }
    case ElementKind::Signal: {
      SignalInfo sig;
      sig.signal_id = e.value("signal_id", el.id);
      if (sig.signal_id.empty())
        issues.add(p + ".signal_id", "missing");
      if (el.id.empty())
        el.id = sig.signal_id;
      sig.height = number_at(e, "height", p, issues, false).value_or(0.0);
      if (e.contains("signal_class"))
      {
        const auto cls = e["signal_class"].is_string()
                           ? signal::parse_signal_class(e["signal_class"].get<std::string>())
                           : std::nullopt;
        if (!cls)
          issues.add(p + ".signal_class", "expected StopGo or Switch");
        else
          sig.signal_class = *cls;
      }
      sig.allowed_go_states = states_at(e, "allowed_go_states", p, issues);
      for (auto g : sig.allowed_go_states)
        if (!signal::is_go_state(g))
          issues.add(p + ".allowed_go_states", std::string(signal::to_string(g)) + " is not a go state");
      sig.possible_states = states_at(e, "possible_states", p, issues);
      if (sig.possible_states.empty())
        sig.possible_states = signal::default_possible_states(sig.signal_class, sig.allowed_go_states);

      const auto stop = number_at(e, "stop_point_s", p, issues, false);
      const auto commit = number_at(e, "commit_point_s", p, issues, false);
      const auto d = s0 ? signal::default_stop_and_commit(el.s_start, defaults) : signal::StopCommitPoints{};
      sig.stop_point_s = stop.value_or(d.stop_point_s);
      sig.commit_point_s = commit.value_or(stop ? std::max(0.0, *stop - defaults.commit_gap) : d.commit_point_s);
      el.attributes = std::move(sig);
      break;
    }
    default: break;
    }
    out.push_back(std::move(el));
  }
  if (!issues.list.empty())
    throw ValidationError(std::move(issues.list));
  return out;
}

json to_json(const InfrastructureElement& e)
{
  json j{{"id", e.id}, {"kind", std::string(to_string(e.kind))}, {"s_start", e.s_start}, {"s_end", e.s_end}};
  if (const auto* p = e.platform())
    j["stop_point_s"] = p->stop_point_s;
  if (const auto* l = e.speed_limit())
    j["limit"] = l->limit;
  if (const auto* s = e.signal())
  {
    j["signal_id"] = s->signal_id;
    j["height"] = s->height;
    j["signal_class"] = std::string(signal::to_string(s->signal_class));
    j["allowed_go_states"] = states_to_json(s->allowed_go_states);
    j["possible_states"] = states_to_json(s->possible_states);
    j["stop_point_s"] = s->stop_point_s;
    j["commit_point_s"] = s->commit_point_s;
  }
  return j;
}

json to_json(const TrackMap& map)
{
  json pts = json::array();
  for (const auto& p : map.points())
    pts.push_back({p.x(), p.y()});
  json elements = json::array();
  for (const auto& e : map.elements())
    elements.push_back(to_json(e));
  return {{"points", pts},
          {"cumulative_chainage", map.chainage()},
          {"total_length", map.total_length()},
          {"elements", elements}};
}

TrackMap map_from_json(const json& j, const signal::StopCommitConfig& defaults, const std::string& path)
{
  if (!j.is_object())
    throw ValidationError({path + ": expected map object"});
  Issues issues;
  std::vector<InfrastructureElement> elements;
  if (j.contains("elements"))
  {
    try
    {
      elements = elements_from_json(j["elements"], defaults, path + ".elements");
    }
    catch (const ValidationError& e)
    {
      issues.list.insert(issues.list.end(), e.issues().begin(), e.issues().end());
    }
  }

  std::vector<Point2d> pts;
  std::optional<double> tolerance;
  if (j.contains("points"))
    pts = points_from_json(j["points"], path + ".points", issues);
  else if (j.contains("trajectory"))
  {
    pts = points_from_json(j["trajectory"], path + ".trajectory", issues);
    tolerance = number_at(j, "tolerance", path, issues);
    if (tolerance && !(*tolerance > 0.0))
      issues.add(path + ".tolerance", "must be > 0");
  }
  else
    issues.add(path, "expected 'points' or 'trajectory'");
  if (!issues.list.empty())
    throw ValidationError(std::move(issues.list));

  try
  {
    if (tolerance)
      return build_map(pts, *tolerance, std::move(elements));
    return TrackMap(std::move(pts), std::move(elements));
  }
  catch (const InvalidMap& e)
  {
    throw ValidationError({path + ": " + e.what()});
  }
  catch (const InvalidInput& e)
  {
    throw ValidationError({path + ": " + e.what()});
  }
}

} // namespace tram::map
