#include "tram/obstacle_planner.hpp"

#include <algorithm>
#include <cmath>

#include "tram/errors.hpp"

namespace tram::obstacle
{

namespace
{

constexpr double kMinSection = 1e-3;

bool widens_warning(const map::InfrastructureElement& e)
{
  return e.kind == map::ElementKind::Platform || e.is_crossing();
}

Polygon2d corridor(const map::TrackMap& map, double s0, double s1, double half_width)
{
  return map::clearance_corridor(map, s0, s1, half_width, std::min(map::kCorridorSampleStep, s1 - s0));
}

/// Smallest chainage at which `shape` meets `zone`, if it does.
std::optional<double> first_contact(const map::TrackMap& map, const Polygon2d& shape, const Polygon2d& zone)
{
  std::optional<double> best;
  auto consider = [&](const Point2d& p) {
    const double s = map.project(p).s;
    if (!best || s < *best)
      best = s;
  };
  for (const auto& p : shape)
    if (point_in_polygon(p, zone))
      consider(p);
  for (const auto& p : zone)
    if (point_in_polygon(p, shape))
      consider(p);
  const std::size_t n = shape.size();
  const std::size_t m = zone.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
    {
      const auto& a = shape[i];
      const auto& b = shape[(i + 1) % n];
      const auto& c = zone[j];
      const auto& d = zone[(j + 1) % m];
      if (segments_intersect(a, b, c, d))
        consider(segment_intersection_point(a, b, c, d));
    }
  return best;
}

struct Box
{
  Point2d lo;
  Point2d hi;
};

Box bounds(const Polygon2d& poly, double pad = 0.0)
{
  Box b{Point2d::Constant(std::numeric_limits<double>::infinity()),
        Point2d::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& p : poly)
  {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  b.lo.array() -= pad;
  b.hi.array() += pad;
  return b;
}

bool overlaps(const Box& a, const Box& b)
{
  return (a.lo.array() <= b.hi.array()).all() && (b.lo.array() <= a.hi.array()).all();
}

} // namespace

DetectionZones build_zones(const map::TrackMap& map, double s, double lookahead, const ZoneConfig& config)
{
  if (!(lookahead > 0.0))
    throw InvalidInput("build_zones needs lookahead > 0");
  if (!(config.collision_half_width > 0.0) || config.warning_half_width < config.collision_half_width ||
      config.special_warning_half_width < config.collision_half_width)
    throw InvalidInput("zone widths must be positive with collision <= warning");

  DetectionZones zones;
  zones.s_start = std::clamp(s, 0.0, map.total_length());
  zones.s_end = std::min(zones.s_start + lookahead, map.total_length());
  zones.collision_half_width = config.collision_half_width;
  if (zones.s_end - zones.s_start < kMinSection)
    return zones;

  std::vector<double> cuts{zones.s_start, zones.s_end};
  for (const auto& e : map.elements())
    if (widens_warning(e))
      for (double c : {e.s_start, e.s_end})
        if (c > zones.s_start && c < zones.s_end)
          cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < kMinSection; }), cuts.end());
  cuts.back() = zones.s_end;

  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
  {
    ZoneSection sec;
    sec.s_start = cuts[i];
    sec.s_end = cuts[i + 1];
    const double mid = 0.5 * (sec.s_start + sec.s_end);
    const bool special = std::any_of(map.elements().begin(), map.elements().end(), [&](const auto& e) {
      return widens_warning(e) && e.s_start <= mid && mid <= e.s_end;
    });
    sec.warning_half_width = special ? config.special_warning_half_width : config.warning_half_width;
    sec.collision = corridor(map, sec.s_start, sec.s_end, config.collision_half_width);
    sec.warning = corridor(map, sec.s_start, sec.s_end, sec.warning_half_width);
    zones.sections.push_back(std::move(sec));
  }
  return zones;
}

double footprint_radius(fusion::ObjectClass cls)
{
  switch (cls)
  {
  case fusion::ObjectClass::Pedestrian: return 0.3;
  case fusion::ObjectClass::Car: return 1.0;
  case fusion::ObjectClass::Tram: return 1.3;
  case fusion::ObjectClass::Unknown:
  case fusion::ObjectClass::Infrastructure: return 0.5;
  }
  return 0.5;
}

ObstacleDecision decide(const map::TrackMap& map, const loc::TrackFix& vehicle,
                        std::span<const fusion::FusedTrack> tracks,
                        std::span<const freespace::OccupiedPolygon> polygons, const DetectionZones& zones,
                        const PlannerDynamics& dynamics)
{
  if (!(dynamics.a_service > 0.0) || dynamics.stop_offset < 0.0 || dynamics.bell_distance < 0.0)
    throw InvalidInput("planner dynamics need a_service > 0 and non-negative distances");

  ObstacleDecision out;
  out.mal = {zones.s_end, MalSource::TrackEnd};

  auto record = [&](std::optional<double> collision_s, bool in_warning, std::string source) {
    if (collision_s)
    {
      if (*collision_s < vehicle.s)
      {
        out.anomalies.push_back(source + " behind vehicle ignored");
        return;
      }
      out.intrusions.push_back({*collision_s, true, std::move(source)});
    }
    else if (in_warning)
    {
      out.intrusions.push_back({std::numeric_limits<double>::quiet_NaN(), false, std::move(source)});
    }
  };

  for (const auto& t : tracks)
  {
    const Point2d p = t.position();
    const double r = footprint_radius(t.cls);
    std::optional<double> hit;
    bool warn = false;
    for (const auto& sec : zones.sections)
    {
      if (!overlaps(bounds(sec.warning), Box{p.array() - r, p.array() + r}))
        continue;
      const bool in_collision = point_in_polygon(p, sec.collision) || point_boundary_distance(p, sec.collision) <= r;
      if (in_collision)
      {
        const double s = std::max(zones.s_start, map.project(p).s - r);
        hit = hit ? std::min(*hit, s) : s;
      }
      else if (point_in_polygon(p, sec.warning) || point_boundary_distance(p, sec.warning) <= r)
        warn = true;
    }
    record(hit, warn, "track:" + std::to_string(t.id));
  }

  for (std::size_t k = 0; k < polygons.size(); ++k)
  {
    const auto& poly = polygons[k].vertices;
    const Box pb = bounds(poly);
    std::optional<double> hit;
    bool warn = false;
    for (const auto& sec : zones.sections)
    {
      if (!overlaps(bounds(sec.warning), pb))
        continue;
      if (const auto s = first_contact(map, poly, sec.collision))
      {
        const double sc = std::clamp(*s, sec.s_start, sec.s_end);
        hit = hit ? std::min(*hit, sc) : sc;
      }
      else if (first_contact(map, poly, sec.warning))
        warn = true;
    }
    record(hit, warn, "polygon:" + std::to_string(k));
  }

  bool warning_only = false;
  for (const auto& in : out.intrusions)
  {
    if (!in.collision)
      warning_only = true;
    else if (!out.nearest_obstacle_s || in.s < *out.nearest_obstacle_s)
      out.nearest_obstacle_s = in.s;
  }

  if (out.nearest_obstacle_s)
  {
    const double limit = std::max(vehicle.s, *out.nearest_obstacle_s - dynamics.stop_offset);
    out.mal = {limit, MalSource::Obstacle};
    const double gap = *out.nearest_obstacle_s - vehicle.s;
    const double braking = vehicle.v * vehicle.v / (2.0 * dynamics.a_service);
    if (limit - vehicle.s < braking || gap < dynamics.bell_distance)
      out.bell = true;
  }
  if (warning_only)
    out.bell = true;
  return out;
}

GridAdjustment grid_separator_adjust(const MovementAuthorityLimit& mal, const map::TrackMap& map, double margin,
                                     double vehicle_s)
{
  if (margin < 0.0)
    throw InvalidInput("grid separator margin must be >= 0");
  GridAdjustment out{mal, false, false};
  // repeat so a pull-back that lands in an adjacent separator is handled too
  for (bool moved = true; moved;)
  {
    moved = false;
    for (const auto& e : map.elements())
    {
      if (e.kind != map::ElementKind::GridSeparator || !(out.mal.limit_s >= e.s_start && out.mal.limit_s < e.s_end))
        continue;
      const double pulled = e.s_start - margin;
      if (pulled >= out.mal.limit_s)
        continue;
      if (pulled < vehicle_s)
        return {mal, false, true};
      out.mal.limit_s = pulled;
      out.adjusted = moved = true;
    }
  }
  return out;
}

} // namespace tram::obstacle
