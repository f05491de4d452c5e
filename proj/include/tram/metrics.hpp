#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tram::sim
{

struct MarginCheck
{
  std::string actor;
  double needed = 0.0;    // service braking distance at first sight
  double available = 0.0; // distance to the obstacle at first sight
  bool deficient = false; // needed > available - stop_offset
};

struct PlatformStop
{
  std::string platform;
  double error = 0.0; // stop position minus stop point
};

struct MetricsReport
{
  std::string scenario;
  std::string status = "ok";
  double duration = 0.0;
  std::size_t ticks = 0;

  std::size_t signals_passed = 0;
  std::size_t signal_pass_violations = 0;
  std::size_t committed_stop_passes = 0; // stop aspect, but committed while go/get-ready
  std::size_t go_encounters = 0;
  std::size_t unnecessary_stops = 0;

  std::optional<double> min_obstacle_margin;
  std::vector<MarginCheck> margin_checks;
  bool margin_deficient = false;

  std::vector<PlatformStop> platform_stops;
  double max_platform_stop_error = 0.0;

  std::size_t bell_activations = 0;
  std::size_t stops = 0;
  std::size_t false_stops = 0;

  std::size_t safety_faults = 0;
  std::size_t anomalies = 0;

  double max_braking_curve_excess = -std::numeric_limits<double>::infinity();
  double max_speed_excess = -std::numeric_limits<double>::infinity();

  nlohmann::json to_json() const;
};

struct CsvRow
{
  double t = 0.0;
  double s = 0.0;
  double v = 0.0;
  double mal = 0.0;
  bool bell = false;
};

inline constexpr const char* kCsvHeader = "t,s,v,mal,bell";

/// Folds event-log records into a MetricsReport. The simulator and the
/// report command feed it the same records, so both agree.
class MetricsAccumulator
{
public:
  explicit MetricsAccumulator(bool keep_series = false) : keep_series_(keep_series) {}

  void consume(const nlohmann::json& record);
  const MetricsReport& report() const { return report_; }
  const std::vector<CsvRow>& series() const { return series_; }

private:
  MetricsReport report_;
  bool keep_series_;
  std::vector<CsvRow> series_;
  double a_service_ = 1.2;
  bool bell_on_ = false;
};

/// Parses a JSON-Lines log. A corrupt line raises ParseError with its number.
MetricsAccumulator summarize_log(std::istream& in, bool keep_series = false);

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);

} // namespace tram::sim
