#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tram/geometry.hpp"
#include "tram/localization.hpp"
#include "tram/track_map.hpp"

namespace tram::freespace
{

/// Lidar return in the sensor frame.
struct LidarPoint
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double t = 0.0;
};

/// Sensor mounting pose in the vehicle frame (x forward, y left, z up).
struct SensorExtrinsic
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;
};

struct ClearanceGauge
{
  double z_min = 0.3;
  double z_max = 3.8;
  double lateral_half_width = 1.5;

  void validate() const;
};

struct OccupiedPolygon
{
  Polygon2d vertices; // convex, counter-clockwise
  std::size_t source_point_count = 0;
  bool is_shadow = false;
};

using PoseAt = std::function<loc::Pose2D(double)>;

/// Linear interpolation over a time-ordered pose history; heading takes the
/// short way round. Outside the history the nearest pose is returned.
loc::Pose2D interpolate_pose(std::span<const loc::Pose2D> history, double t);

/// Sensor -> vehicle -> map for every point. Throws ConfigError when a cloud
/// has no extrinsic. Clouds are processed in key order.
std::vector<Eigen::Vector3d> align_clouds(const std::map<std::string, std::vector<LidarPoint>>& clouds,
                                          const std::map<std::string, SensorExtrinsic>& extrinsics,
                                          const PoseAt& vehicle_pose_at);

/// Keeps points inside the height band and within the lateral half-width of the centreline.
std::vector<Eigen::Vector3d> gauge_filter(std::span<const Eigen::Vector3d> points, const ClearanceGauge& gauge,
                                          const map::TrackMap& map);

/// Single-linkage components of the eps-neighbour graph (distance <= eps).
/// Each cluster lists point indices in ascending order; clusters are ordered
/// by their first index. Clusters smaller than min_points are dropped.
std::vector<std::vector<std::size_t>> cluster(std::span<const Point2d> points, double eps, std::size_t min_points);

/// Convex hull of the cluster. Clusters without positive hull area (one or two
/// points, or collinear) become the hull of eps/2 squares around each point.
OccupiedPolygon hull(std::span<const Point2d> cluster_points, double eps);

/// Radial shadow behind each polygon as seen from the sensor: the two
/// silhouette vertices and their projections out to max_range. Polygons that
/// contain the sensor or lie beyond max_range cast no shadow.
std::vector<OccupiedPolygon> occlusion_shadows(std::span<const OccupiedPolygon> polygons, const Point2d& sensor_origin,
                                               double max_range);

struct FreeSpaceConfig
{
  ClearanceGauge gauge;
  double eps = 0.5;
  std::size_t min_points = 3;
  bool conservative = false;
  double max_range = 80.0;
};

/// gauge_filter -> ground projection -> cluster -> hull, plus shadows in conservative mode.
std::vector<OccupiedPolygon> occupied_space(std::span<const Eigen::Vector3d> map_points, const map::TrackMap& map,
                                            const FreeSpaceConfig& config, const Point2d& sensor_origin);

} // namespace tram::freespace
