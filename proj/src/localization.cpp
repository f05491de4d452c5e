#include "tram/localization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tram/errors.hpp"

namespace tram::loc
{

TrackFix project_to_track(const map::TrackMap& map, const Pose2D& pose, double position_std)
{
  const auto proj = map.project({pose.x, pose.y});
  if (proj.distance > kOffTrackThreshold)
  {
    std::ostringstream os;
    os << "pose (" << pose.x << ", " << pose.y << ") is " << proj.distance << " m from the allocated track";
    throw OffTrackError(os.str(), proj.lateral);
  }
  return {proj.s, std::max(0.0, pose.speed), FixMode::GnssAided, position_std};
}

TrackFix dead_reckon(const TrackFix& prev, double speed_meas, double dt, double track_length, double drift_rate)
{
  if (!(dt > 0.0))
    throw InvalidInput("dead_reckon dt must be > 0");
  TrackFix next;
  next.s = std::clamp(prev.s + speed_meas * dt, 0.0, track_length);
  next.v = std::max(0.0, speed_meas);
  next.mode = FixMode::DeadReckoning;
  next.position_std = prev.position_std + drift_rate * dt;
  return next;
}

InsMeasurement simulate_ins(const Pose2D& truth, const InsConfig& config, std::mt19937_64& rng)
{
  auto noise = [&rng](double sigma) {
    if (sigma <= 0.0)
      return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
  };

  InsMeasurement m;
  m.gnss_valid = std::none_of(config.dropouts.begin(), config.dropouts.end(),
                              [&](const DropoutWindow& w) { return w.contains(truth.timestamp); });
  m.pose = truth;
  // draw order is fixed so the stream stays aligned across dropout windows
  const double dx = noise(config.position_std);
  const double dy = noise(config.position_std);
  const double dh = noise(config.heading_std);
  const double dv = noise(m.gnss_valid ? config.velocity_std : config.odometry_std);
  m.pose.x += dx;
  m.pose.y += dy;
  m.pose.heading = normalize_angle(truth.heading + dh);
  m.pose.speed = std::max(0.0, truth.speed + dv);
  return m;
}

MonotoneResult monotone_chainage(double prev_s, double new_s, double tol)
{
  if (new_s >= prev_s)
    return {new_s, false};
  if (new_s >= prev_s - tol)
    return {prev_s, false};
  return {new_s, true};
}

Localizer::Localizer(const map::TrackMap& map, InsConfig config, TrackFix initial)
  : map_(&map), config_(std::move(config)), fix_(initial)
{}

TrackFix Localizer::update(const InsMeasurement& meas, double dt)
{
  backward_jump_ = false;
  if (meas.gnss_valid)
  {
    TrackFix f = project_to_track(*map_, meas.pose, config_.position_std);
    const auto mono = monotone_chainage(fix_.s, f.s);
    f.s = mono.s;
    backward_jump_ = mono.backward_jump;
    fix_ = f;
  }
  else
  {
    fix_ = dead_reckon(fix_, meas.pose.speed, dt, map_->total_length(), config_.drift_rate);
  }
  return fix_;
}

} // namespace tram::loc
