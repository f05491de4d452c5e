#include "tram/free_space.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tram/errors.hpp"

namespace tram::freespace
{

void ClearanceGauge::validate() const
{
  if (!(z_min >= 0.0 && z_min < z_max))
    throw InvalidInput("clearance gauge needs 0 <= z_min < z_max");
  if (!(lateral_half_width > 0.0))
    throw InvalidInput("clearance gauge half width must be > 0");
}

loc::Pose2D interpolate_pose(std::span<const loc::Pose2D> history, double t)
{
  if (history.empty())
    throw InvalidInput("interpolate_pose needs a non-empty history");
  if (t <= history.front().timestamp)
    return history.front();
  if (t >= history.back().timestamp)
    return history.back();
  const auto hi = std::upper_bound(history.begin(), history.end(), t,
                                   [](double v, const loc::Pose2D& p) { return v < p.timestamp; });
  const auto& b = *hi;
  const auto& a = *(hi - 1);
  const double span = b.timestamp - a.timestamp;
  const double u = span > 0.0 ? (t - a.timestamp) / span : 0.0;
  loc::Pose2D out;
  out.x = a.x + u * (b.x - a.x);
  out.y = a.y + u * (b.y - a.y);
  out.heading = normalize_angle(a.heading + u * normalize_angle(b.heading - a.heading));
  out.speed = a.speed + u * (b.speed - a.speed);
  out.yaw_rate = a.yaw_rate + u * (b.yaw_rate - a.yaw_rate);
  out.timestamp = t;
  return out;
}

std::vector<Eigen::Vector3d> align_clouds(const std::map<std::string, std::vector<LidarPoint>>& clouds,
                                          const std::map<std::string, SensorExtrinsic>& extrinsics,
                                          const PoseAt& vehicle_pose_at)
{
  std::vector<Eigen::Vector3d> out;
  for (const auto& [sensor, points] : clouds)
  {
    const auto ext = extrinsics.find(sensor);
    if (ext == extrinsics.end())
      throw ConfigError("no extrinsic for lidar '" + sensor + "'");
    const auto& e = ext->second;
    for (const auto& p : points)
    {
      const Point2d in_vehicle = Point2d(e.x, e.y) + rotate(Point2d(p.x, p.y), e.yaw);
      const loc::Pose2D pose = vehicle_pose_at(p.t);
      const Point2d in_map = Point2d(pose.x, pose.y) + rotate(in_vehicle, pose.heading);
      out.emplace_back(in_map.x(), in_map.y(), p.z + e.z);
    }
  }
  return out;
}

std::vector<Eigen::Vector3d> gauge_filter(std::span<const Eigen::Vector3d> points, const ClearanceGauge& gauge,
                                          const map::TrackMap& map)
{
  gauge.validate();
  std::vector<Eigen::Vector3d> kept;
  for (const auto& p : points)
  {
    if (p.z() < gauge.z_min || p.z() > gauge.z_max)
      continue;
    if (std::abs(map.project(p.head<2>()).lateral) > gauge.lateral_half_width)
      continue;
    kept.push_back(p);
  }
  return kept;
}

namespace
{

struct CellHash
{
  std::size_t operator()(const std::pair<long, long>& c) const
  {
    return std::hash<long>()(c.first) * 1000003u ^ std::hash<long>()(c.second);
  }
};

} // namespace

std::vector<std::vector<std::size_t>> cluster(std::span<const Point2d> points, double eps, std::size_t min_points)
{
  if (!(eps > 0.0) || min_points < 1)
    throw InvalidInput("cluster needs eps > 0 and min_points >= 1");

  auto cell_of = [eps](const Point2d& p) {
    return std::pair<long, long>(static_cast<long>(std::floor(p.x() / eps)), static_cast<long>(std::floor(p.y() / eps)));
  };
  std::unordered_map<std::pair<long, long>, std::vector<std::size_t>, CellHash> grid;
  for (std::size_t i = 0; i < points.size(); ++i)
    grid[cell_of(points[i])].push_back(i);

  std::vector<std::vector<std::size_t>> clusters;
  std::vector<bool> seen(points.size(), false);
  const double eps2 = eps * eps;
  for (std::size_t seed = 0; seed < points.size(); ++seed)
  {
    if (seen[seed])
      continue;
    std::vector<std::size_t> members{seed};
    seen[seed] = true;
    for (std::size_t head = 0; head < members.size(); ++head)
    {
      const Point2d& p = points[members[head]];
      const auto [cx, cy] = cell_of(p);
      for (long dx = -1; dx <= 1; ++dx)
        for (long dy = -1; dy <= 1; ++dy)
        {
          const auto it = grid.find({cx + dx, cy + dy});
          if (it == grid.end())
            continue;
          for (std::size_t j : it->second)
            if (!seen[j] && (points[j] - p).squaredNorm() <= eps2)
            {
              seen[j] = true;
              members.push_back(j);
            }
        }
    }
    if (members.size() >= min_points)
    {
      std::sort(members.begin(), members.end());
      clusters.push_back(std::move(members));
    }
  }
  return clusters;
}

OccupiedPolygon hull(std::span<const Point2d> cluster_points, double eps)
{
  if (cluster_points.empty())
    throw InvalidInput("hull needs at least one point");
  OccupiedPolygon poly;
  poly.source_point_count = cluster_points.size();
  poly.vertices = convex_hull(Polygon2d(cluster_points.begin(), cluster_points.end()));
  if (poly.vertices.size() >= 3 && area(poly.vertices) > 0.0)
    return poly;

  Polygon2d corners;
  for (const auto& p : cluster_points)
    for (const auto& c : square_around(p, eps / 2.0))
      corners.push_back(c);
  poly.vertices = convex_hull(std::move(corners));
  return poly;
}

std::vector<OccupiedPolygon> occlusion_shadows(std::span<const OccupiedPolygon> polygons, const Point2d& sensor_origin,
                                               double max_range)
{
  std::vector<OccupiedPolygon> shadows;
  for (const auto& poly : polygons)
  {
    if (poly.vertices.size() < 3 || point_in_polygon(sensor_origin, poly.vertices))
      continue;
    Point2d centroid = Point2d::Zero();
    for (const auto& v : poly.vertices)
      centroid += v;
    centroid /= static_cast<double>(poly.vertices.size());
    const Point2d axis = centroid - sensor_origin;

    // silhouette: extreme bearings relative to the centroid direction
    std::size_t right = 0;
    std::size_t left = 0;
    double min_angle = std::numeric_limits<double>::infinity();
    double max_angle = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.vertices.size(); ++i)
    {
      const Point2d d = poly.vertices[i] - sensor_origin;
      const double a = std::atan2(cross2(axis, d), axis.dot(d));
      if (a < min_angle)
      {
        min_angle = a;
        right = i;
      }
      if (a > max_angle)
      {
        max_angle = a;
        left = i;
      }
    }
    const Point2d vr = poly.vertices[right];
    const Point2d vl = poly.vertices[left];
    const double rr = (vr - sensor_origin).norm();
    const double rl = (vl - sensor_origin).norm();
    if (rr >= max_range || rl >= max_range || right == left)
      continue;

    OccupiedPolygon shadow;
    shadow.is_shadow = true;
    shadow.source_point_count = poly.source_point_count;
    shadow.vertices = {vr, sensor_origin + (vr - sensor_origin) * (max_range / rr),
                       sensor_origin + (vl - sensor_origin) * (max_range / rl), vl};
    shadows.push_back(std::move(shadow));
  }
  return shadows;
}

std::vector<OccupiedPolygon> occupied_space(std::span<const Eigen::Vector3d> map_points, const map::TrackMap& map,
                                            const FreeSpaceConfig& config, const Point2d& sensor_origin)
{
  const auto kept = gauge_filter(map_points, config.gauge, map);
  std::vector<Point2d> ground;
  ground.reserve(kept.size());
  for (const auto& p : kept)
    ground.push_back(p.head<2>());

  std::vector<OccupiedPolygon> polygons;
  for (const auto& members : cluster(ground, config.eps, config.min_points))
  {
    std::vector<Point2d> pts;
    pts.reserve(members.size());
    for (std::size_t i : members)
      pts.push_back(ground[i]);
    polygons.push_back(hull(pts, config.eps));
  }
  if (config.conservative)
  {
    auto shadows = occlusion_shadows(polygons, sensor_origin, config.max_range);
    polygons.insert(polygons.end(), std::make_move_iterator(shadows.begin()), std::make_move_iterator(shadows.end()));
  }
  return polygons;
}

} // namespace tram::freespace
