#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tram/geometry.hpp"
#include "tram/signal_types.hpp"

namespace tram::map
{

enum class ElementKind
{
  Platform,
  Signal,
  RoadCrossing,
  PedestrianCrossing,
  SpeedLimit,
  GridSeparator
};

std::string_view to_string(ElementKind k);
std::optional<ElementKind> parse_element_kind(std::string_view s);

struct PlatformInfo
{
  double stop_point_s = 0.0;
};

struct SignalInfo
{
  std::string signal_id;
  double height = 0.0;
  signal::SignalClass signal_class = signal::SignalClass::StopGo;
  std::vector<signal::SignalState> allowed_go_states;
  std::vector<signal::SignalState> possible_states;
  double stop_point_s = 0.0;
  double commit_point_s = 0.0;
};

struct SpeedLimitInfo
{
  double limit = 0.0;
};

using ElementAttributes = std::variant<std::monostate, PlatformInfo, SignalInfo, SpeedLimitInfo>;

struct InfrastructureElement
{
  std::string id;
  ElementKind kind = ElementKind::GridSeparator;
  double s_start = 0.0;
  double s_end = 0.0;
  ElementAttributes attributes;

  const SignalInfo* signal() const { return std::get_if<SignalInfo>(&attributes); }
  const PlatformInfo* platform() const { return std::get_if<PlatformInfo>(&attributes); }
  const SpeedLimitInfo* speed_limit() const { return std::get_if<SpeedLimitInfo>(&attributes); }
  bool is_crossing() const { return kind == ElementKind::RoadCrossing || kind == ElementKind::PedestrianCrossing; }
};

struct TrackPose
{
  Point2d position;
  double heading = 0.0;
};

struct Projection
{
  double s = 0.0;
  double lateral = 0.0; // positive to the left of the direction of travel
  double distance = 0.0;
};

/// Single allocated route: planar centreline with chainage and infrastructure.
/// Immutable after construction.
class TrackMap
{
public:
  /// Drops zero-length segments, computes chainage and validates elements.
  /// Throws InvalidInput on fewer than two distinct points and InvalidMap on bad elements.
  TrackMap(std::vector<Point2d> points, std::vector<InfrastructureElement> elements);

  const std::vector<Point2d>& points() const { return points_; }
  const std::vector<double>& chainage() const { return chainage_; }
  const std::vector<InfrastructureElement>& elements() const { return elements_; }
  double total_length() const { return chainage_.back(); }

  /// Throws RangeError when s is outside [0, total_length].
  TrackPose point_at(double s) const;

  /// Closest point on the centreline; ties resolve toward lower chainage.
  Projection project(const Point2d& p) const;

  /// Index i of the segment [i, i+1] containing s.
  std::size_t segment_index(double s) const;

  const InfrastructureElement* find_signal(std::string_view signal_id) const;

private:
  std::vector<Point2d> points_;
  std::vector<double> chainage_;
  std::vector<InfrastructureElement> elements_;
};

/// Recursive max-deviation split. Output is a subsequence of the input
/// keeping both endpoints; every dropped point lies within `tolerance`
/// of the simplified polyline.
std::vector<Point2d> simplify_polyline(std::span<const Point2d> points, double tolerance);

/// Simplifies the surveyed trajectory and attaches hand-mapped elements.
TrackMap build_map(std::span<const Point2d> trajectory, double tolerance, std::vector<InfrastructureElement> elements);

struct HorizonEvent
{
  double distance_ahead = 0.0;
  std::size_t element_index = 0;
  InfrastructureElement element;
};

struct DigitalHorizon
{
  double origin_s = 0.0;
  double end_s = 0.0; // min(origin_s + lookahead, total_length)
  double lookahead = 0.0;
  std::vector<HorizonEvent> events;
  std::vector<Point2d> geometry;
};

/// Elements whose [s_start, s_end] meets (s, s + lookahead], sorted by distance ahead.
DigitalHorizon digital_horizon(const TrackMap& map, double s, double lookahead);

inline constexpr double kCorridorSampleStep = 1.0;

/// Centreline offset by +/- half_width between s_start and s_end, as a
/// counter-clockwise ring (right edge forward, left edge back).
/// Throws InvalidInput when the span is shorter than one sample step.
Polygon2d clearance_corridor(const TrackMap& map, double s_start, double s_end, double half_width,
                             double sample_step = kCorridorSampleStep);

/// Chainage of every corridor sample, in the order of the right edge.
std::vector<double> corridor_samples(const TrackMap& map, double s_start, double s_end,
                                     double sample_step = kCorridorSampleStep);

} // namespace tram::map
