#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tram/free_space.hpp"
#include "tram/localization.hpp"
#include "tram/mal.hpp"
#include "tram/obstacle_fusion.hpp"
#include "tram/track_map.hpp"

namespace tram::obstacle
{

struct ZoneConfig
{
  double collision_half_width = 1.5;
  double warning_half_width = 3.0;
  double special_warning_half_width = 4.0; // platforms and crossings
};

/// Sub-span of the zones with a single set of widths.
struct ZoneSection
{
  double s_start = 0.0;
  double s_end = 0.0;
  double warning_half_width = 0.0;
  Polygon2d collision;
  Polygon2d warning;
};

struct DetectionZones
{
  double s_start = 0.0;
  double s_end = 0.0;
  double collision_half_width = 0.0;
  std::vector<ZoneSection> sections;
};

/// Corridors over [s, min(s + lookahead, track end)], split where platforms
/// and crossings switch the warning width.
DetectionZones build_zones(const map::TrackMap& map, double s, double lookahead, const ZoneConfig& config = {});

struct PlannerDynamics
{
  double a_service = 1.2;
  double bell_distance = 30.0;
  double stop_offset = 5.0;
};

/// Footprint radius used when testing a fused track against the zones.
double footprint_radius(fusion::ObjectClass cls);

struct Intrusion
{
  double s = 0.0;
  bool collision = false;
  std::string source; // "track:<id>" or "polygon:<index>"
};

struct ObstacleDecision
{
  MovementAuthorityLimit mal;
  bool bell = false;
  std::optional<double> nearest_obstacle_s;
  std::vector<Intrusion> intrusions;
  std::vector<std::string> anomalies;
};

/// Nearest collision-zone intrusion sets MAL = s_obs - stop_offset (not
/// below the vehicle). The bell sounds when the remaining distance to that
/// MAL is shorter than the service braking distance, when the obstacle is
/// within bell_distance, or for any warning-zone-only intrusion.
ObstacleDecision decide(const map::TrackMap& map, const loc::TrackFix& vehicle,
                        std::span<const fusion::FusedTrack> tracks,
                        std::span<const freespace::OccupiedPolygon> polygons, const DetectionZones& zones,
                        const PlannerDynamics& dynamics = {});

struct GridAdjustment
{
  MovementAuthorityLimit mal;
  bool adjusted = false;
  bool infeasible = false; // pulled-back limit would lie behind the vehicle
};

/// Pulls a limit inside a separator [s0, s1) back to s0 - margin. When that
/// lands behind vehicle_s the original limit is kept and flagged infeasible.
GridAdjustment grid_separator_adjust(const MovementAuthorityLimit& mal, const map::TrackMap& map, double margin,
                                     double vehicle_s = -std::numeric_limits<double>::infinity());

} // namespace tram::obstacle
