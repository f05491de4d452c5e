#include "tram/sensors.hpp"

#include <cmath>
#include <numbers>

namespace tram::sim
{

namespace
{

double gauss(std::mt19937_64& rng, double sigma)
{
  return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng) : 0.0;
}

bool chance(std::mt19937_64& rng, double p)
{
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

Point2d heading_vector(double heading)
{
  return {std::cos(heading), std::sin(heading)};
}

bool in_view(const loc::Pose2D& vehicle, const Point2d& p, double range)
{
  const Point2d d = p - Point2d(vehicle.x, vehicle.y);
  return d.norm() <= range && d.dot(heading_vector(vehicle.heading)) > 0.0;
}

fusion::ObjectMeasurement position_measurement(fusion::SensorKind sensor, const Point2d& truth,
                                               const Eigen::Matrix2d& cov, fusion::ObjectClass cls,
                                               std::mt19937_64& rng)
{
  const Eigen::LLT<Eigen::Matrix2d> llt(cov);
  const Eigen::Vector2d n(gauss(rng, 1.0), gauss(rng, 1.0));
  fusion::ObjectMeasurement m;
  m.sensor = sensor;
  m.position = truth + llt.matrixL() * n;
  m.cls = cls;
  m.covariance = cov;
  return m;
}

} // namespace

std::vector<signal::ChamberDetection> synthesize_chamber_detections(signal::SignalState state,
                                                                    signal::ChamberSet chambers, double distance,
                                                                    const CameraConfig& config, std::mt19937_64& rng)
{
  std::vector<signal::ChamberDetection> out;
  if (distance <= 0.0 || distance > config.range)
    return out;
  const signal::ChamberSet lit = signal::emission_template(state);
  for (std::size_t c = 0; c < signal::kLitChamberCount; ++c)
  {
    const auto bit = static_cast<signal::ChamberSet>(1u << c);
    if ((chambers & bit) == 0)
      continue;
    if ((lit & bit) == 0)
    {
      out.push_back({signal::ChamberLabel::EMPTY, 1.0});
      continue;
    }
    if (!chance(rng, config.p_tp))
      continue;
    auto label = static_cast<signal::ChamberLabel>(c);
    if (chance(rng, config.p_conf))
    {
      // any other lit-chamber label, uniformly
      auto k = std::uniform_int_distribution<std::size_t>(0, signal::kLitChamberCount - 2)(rng);
      if (k >= c)
        ++k;
      label = static_cast<signal::ChamberLabel>(k);
    }
    out.push_back({label, 1.0});
  }
  return out;
}

SensorBatches synthesize_object_measurements(std::span<const ActorState> actors, std::span<const StaticObject> clutter,
                                             const loc::Pose2D& vehicle, const ObjectSensorConfig& config,
                                             std::mt19937_64& rng)
{
  SensorBatches batches;
  auto& camera = batches[0];
  auto& lidar = batches[1];
  auto& radar = batches[2];
  const Point2d origin(vehicle.x, vehicle.y);
  const Eigen::Matrix2d lidar_cov = config.lidar_sigma * config.lidar_sigma * Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d radar_cov = config.radar_sigma * config.radar_sigma * Eigen::Matrix2d::Identity();

  auto radar_measurement = [&](const Point2d& p, const Point2d& vel, fusion::ObjectClass cls) {
    auto m = position_measurement(fusion::SensorKind::RadarSim, p, radar_cov, cls, rng);
    m.velocity = vel + Eigen::Vector2d(gauss(rng, config.radar_velocity_sigma), gauss(rng, config.radar_velocity_sigma));
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    cov.topLeftCorner<2, 2>() = radar_cov;
    cov.bottomRightCorner<2, 2>() =
      config.radar_velocity_sigma * config.radar_velocity_sigma * Eigen::Matrix2d::Identity();
    m.covariance = cov;
    return m;
  };

  for (const auto& a : actors)
  {
    if (!in_view(vehicle, a.position, config.range))
      continue;
    if (config.camera && chance(rng, config.p_detect))
    {
      // range is poorly observed by a monocular camera: stretch along the ray
      const Point2d ray = (a.position - origin).normalized();
      Eigen::Matrix2d R;
      R.col(0) = ray;
      R.col(1) = Point2d(-ray.y(), ray.x());
      const Eigen::Matrix2d cov =
        R * Eigen::Vector2d(config.camera_range_factor, 1.0).asDiagonal() * R.transpose() * config.camera_sigma *
        config.camera_sigma;
      camera.push_back(position_measurement(fusion::SensorKind::CameraSim, a.position, cov, a.cls, rng));
    }
    if (config.lidar && chance(rng, config.p_detect))
      lidar.push_back(
        position_measurement(fusion::SensorKind::LidarSim, a.position, lidar_cov, fusion::ObjectClass::Unknown, rng));
    if (config.radar && chance(rng, config.p_detect))
    {
      if (a.cls == fusion::ObjectClass::Tram)
      {
        const int fragments = std::uniform_int_distribution<int>(2, 4)(rng);
        const Point2d axis =
          a.velocity.norm() > 0.1 ? Point2d(a.velocity.normalized()) : Point2d((a.position - origin).normalized());
        for (int k = 0; k < fragments; ++k)
        {
          const double along = std::uniform_real_distribution<double>(-3.0, 3.0)(rng) * a.footprint;
          radar.push_back(radar_measurement(a.position + along * axis, a.velocity, fusion::ObjectClass::Unknown));
        }
      }
      else
        radar.push_back(radar_measurement(a.position, a.velocity, fusion::ObjectClass::Unknown));
    }
  }

  for (const auto& c : clutter)
  {
    if (!in_view(vehicle, c.position, config.range))
      continue;
    if (config.lidar && chance(rng, config.p_detect))
      lidar.push_back(
        position_measurement(fusion::SensorKind::LidarSim, c.position, lidar_cov, fusion::ObjectClass::Unknown, rng));
    if (config.radar && chance(rng, config.p_detect))
      radar.push_back(radar_measurement(c.position, Point2d::Zero(), fusion::ObjectClass::Infrastructure));
  }
  return batches;
}

std::vector<freespace::LidarPoint> synthesize_lidar(std::span<const ActorState> actors,
                                                    std::span<const StaticObject> statics,
                                                    const loc::Pose2D& vehicle, const map::TrackMap& map,
                                                    double vehicle_s, const LidarConfig& config, double t,
                                                    std::mt19937_64& rng)
{
  std::vector<freespace::LidarPoint> out;
  const Point2d origin(vehicle.x, vehicle.y);
  auto emit = [&](const Point2d& p_map, double z_map) {
    const Point2d local = rotate<double>(p_map - origin, -vehicle.heading);
    out.push_back({local.x() + gauss(rng, config.noise_sigma), local.y() + gauss(rng, config.noise_sigma),
                   z_map - config.mount_height + gauss(rng, config.noise_sigma), t});
  };
  auto sample_surface = [&](const Point2d& centre, double radius, double height) {
    // visible half of the outline, facing the sensor
    const Point2d to_sensor = origin - centre;
    const double facing = std::atan2(to_sensor.y(), to_sensor.x());
    for (int k = 0; k < config.points_per_actor; ++k)
    {
      const double a = facing + std::uniform_real_distribution<double>(-0.5, 0.5)(rng) * std::numbers::pi;
      const double z = std::uniform_real_distribution<double>(0.05, height)(rng);
      emit(centre + radius * Point2d(std::cos(a), std::sin(a)), z);
    }
  };

  for (const auto& a : actors)
    if (in_view(vehicle, a.position, config.range))
      sample_surface(a.position, a.footprint, a.height);
  for (const auto& s : statics)
    if (in_view(vehicle, s.position, config.range))
      sample_surface(s.position, s.radius, s.height);

  const double reach = std::min(config.range, map.total_length() - vehicle_s);
  for (int k = 0; k < config.ground_points && reach > 0.0; ++k)
  {
    const double s = vehicle_s + std::uniform_real_distribution<double>(0.0, reach)(rng);
    const auto pose = map.point_at(s);
    const double lat = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    emit(pose.position + lat * Point2d(-std::sin(pose.heading), std::cos(pose.heading)), 0.0);
  }
  return out;
}

std::vector<StaticObject> place_roadside(const map::TrackMap& map, double per_100m, double lateral, double radius,
                                         double height, std::mt19937_64& rng)
{
  std::vector<StaticObject> out;
  if (per_100m <= 0.0)
    return out;
  const double spacing = 100.0 / per_100m;
  int side = 1;
  for (double s = std::uniform_real_distribution<double>(0.0, spacing)(rng); s < map.total_length(); s += spacing)
  {
    const auto pose = map.point_at(s);
    const Point2d left(-std::sin(pose.heading), std::cos(pose.heading));
    out.push_back({pose.position + side * lateral * left, radius, height});
    side = -side;
  }
  return out;
}

} // namespace tram::sim
