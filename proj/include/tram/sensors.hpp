#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "tram/free_space.hpp"
#include "tram/localization.hpp"
#include "tram/obstacle_fusion.hpp"
#include "tram/scenario.hpp"
#include "tram/signal_filter.hpp"

namespace tram::sim
{

/// Ground truth of an active actor at the current tick.
struct ActorState
{
  std::string id;
  fusion::ObjectClass cls = fusion::ObjectClass::Pedestrian;
  Point2d position = Point2d::Zero();
  Point2d velocity = Point2d::Zero();
  double footprint = 0.5;
  double height = 1.7;
};

/// Static roadside object (pole, fence post, bush).
struct StaticObject
{
  Point2d position = Point2d::Zero();
  double radius = 0.15;
  double height = 6.0;
};

/// Lit chambers of `state` among `chambers`, each seen with probability
/// p_tp and swapped for a random other lit-chamber label with probability
/// p_conf; unlit chambers report EMPTY. Nothing beyond the range gate or
/// behind the camera.
std::vector<signal::ChamberDetection> synthesize_chamber_detections(signal::SignalState state,
                                                                    signal::ChamberSet chambers, double distance,
                                                                    const CameraConfig& config, std::mt19937_64& rng);

/// Per-sensor batches in fixed order: camera, lidar, radar.
using SensorBatches = std::array<std::vector<fusion::ObjectMeasurement>, 3>;

SensorBatches synthesize_object_measurements(std::span<const ActorState> actors, std::span<const StaticObject> clutter,
                                             const loc::Pose2D& vehicle, const ObjectSensorConfig& config,
                                             std::mt19937_64& rng);

/// Sensor-frame returns from actors, roadside objects and the ground ahead.
std::vector<freespace::LidarPoint> synthesize_lidar(std::span<const ActorState> actors,
                                                    std::span<const StaticObject> statics,
                                                    const loc::Pose2D& vehicle, const map::TrackMap& map,
                                                    double vehicle_s, const LidarConfig& config, double t,
                                                    std::mt19937_64& rng);

/// Roadside objects at `per_100m` per 100 m on alternating sides of the track.
std::vector<StaticObject> place_roadside(const map::TrackMap& map, double per_100m, double lateral, double radius,
                                         double height, std::mt19937_64& rng);

} // namespace tram::sim
