#include "tram/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "tram/errors.hpp"

namespace tram::sim
{

using nlohmann::json;

namespace
{

json finite_or_null(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

} // namespace

json MetricsReport::to_json() const
{
  json checks = json::array();
  for (const auto& m : margin_checks)
    checks.push_back({{"actor", m.actor}, {"needed", m.needed}, {"available", m.available}, {"deficient", m.deficient}});
  json platforms = json::array();
  for (const auto& p : platform_stops)
    platforms.push_back({{"platform", p.platform}, {"error", p.error}});
  return {{"scenario", scenario},
          {"status", status},
          {"duration", duration},
          {"ticks", ticks},
          {"signals_passed", signals_passed},
          {"signal_pass_violations", signal_pass_violations},
          {"committed_stop_passes", committed_stop_passes},
          {"go_encounters", go_encounters},
          {"unnecessary_stops", unnecessary_stops},
          {"min_obstacle_margin", min_obstacle_margin ? json(*min_obstacle_margin) : json(nullptr)},
          {"margin_checks", checks},
          {"margin_deficient", margin_deficient},
          {"platform_stops", platforms},
          {"max_platform_stop_error", max_platform_stop_error},
          {"bell_activations", bell_activations},
          {"stops", stops},
          {"false_stops", false_stops},
          {"safety_faults", safety_faults},
          {"anomalies", anomalies},
          {"max_braking_curve_excess", finite_or_null(max_braking_curve_excess)},
          {"max_speed_excess", finite_or_null(max_speed_excess)}};
}

void MetricsAccumulator::consume(const json& r)
{
  const std::string stream = r.at("stream").get<std::string>();
  const double t = r.at("t").get<double>();
  report_.duration = std::max(report_.duration, t);

  if (stream == "run_start")
  {
    report_.scenario = r.value("scenario", std::string{});
    a_service_ = r.value("a_service", a_service_);
  }
  else if (stream == "vehicle")
  {
    ++report_.ticks;
    const double v = r.at("v").get<double>();
    report_.max_speed_excess = std::max(report_.max_speed_excess, v - r.at("speed_limit").get<double>());
    if (keep_series_)
      series_.push_back({t, r.at("s").get<double>(), v, 0.0, false});
  }
  else if (stream == "mal")
  {
    const double limit = r.at("limit").get<double>();
    const double s = r.at("s").get<double>();
    const double v = r.at("v").get<double>();
    report_.max_braking_curve_excess =
      std::max(report_.max_braking_curve_excess, v * v - 2.0 * a_service_ * (limit - s));
    if (keep_series_ && !series_.empty())
      series_.back().mal = limit;
  }
  else if (stream == "obstacles")
  {
    const bool bell = r.at("bell").get<bool>();
    if (bell && !bell_on_)
      ++report_.bell_activations;
    bell_on_ = bell;
    if (r.contains("truth_margin") && r.at("truth_margin").is_number())
    {
      const double m = r.at("truth_margin").get<double>();
      report_.min_obstacle_margin = report_.min_obstacle_margin ? std::min(*report_.min_obstacle_margin, m) : m;
    }
    if (keep_series_ && !series_.empty())
      series_.back().bell = bell;
  }
  else if (stream == "event")
  {
    const std::string kind = r.at("kind").get<std::string>();
    if (kind == "signal_pass")
    {
      ++report_.signals_passed;
      if (r.at("violation").get<bool>())
        ++report_.signal_pass_violations;
      else if (r.value("stop_aspect", false))
        ++report_.committed_stop_passes;
    }
    else if (kind == "signal_encounter")
    {
      if (r.at("go_encounter").get<bool>())
      {
        ++report_.go_encounters;
        if (r.at("stopped").get<bool>())
          ++report_.unnecessary_stops;
      }
    }
    else if (kind == "margin_check")
    {
      MarginCheck m{r.at("actor").get<std::string>(), r.at("needed").get<double>(), r.at("available").get<double>(),
                    r.at("deficient").get<bool>()};
      report_.margin_deficient = report_.margin_deficient || m.deficient;
      report_.margin_checks.push_back(std::move(m));
    }
    else if (kind == "platform_stop")
    {
      PlatformStop p{r.at("platform").get<std::string>(), r.at("error").get<double>()};
      report_.max_platform_stop_error = std::max(report_.max_platform_stop_error, std::abs(p.error));
      report_.platform_stops.push_back(std::move(p));
    }
    else if (kind == "stop")
    {
      ++report_.stops;
      if (r.at("false_stop").get<bool>())
        ++report_.false_stops;
    }
    else if (kind == "safety_fault")
      ++report_.safety_faults;
    else if (kind == "anomaly")
      ++report_.anomalies;
  }
  else if (stream == "run_end")
  {
    report_.status = r.at("status").get<std::string>();
  }
}

MetricsAccumulator summarize_log(std::istream& in, bool keep_series)
{
  MetricsAccumulator acc(keep_series);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.empty())
      continue;
    try
    {
      const json r = json::parse(line);
      if (!r.is_object() || !r.contains("t") || !r.contains("stream"))
        throw ParseError("record lacks 't' or 'stream'", line_no);
      acc.consume(r);
    }
    catch (const json::exception& e)
    {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    catch (const ParseError&)
    {
      throw ParseError("line " + std::to_string(line_no) + ": record lacks 't' or 'stream'", line_no);
    }
  }
  return acc;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows)
{
  out << kCsvHeader << '\n';
  for (const auto& r : rows)
    out << r.t << ',' << r.s << ',' << r.v << ',' << r.mal << ',' << (r.bell ? 1 : 0) << '\n';
}

} // namespace tram::sim
