#pragma once

#include <random>
#include <vector>

#include "tram/track_map.hpp"

namespace tram::loc
{

struct Pose2D
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0; // (-pi, pi]
  double speed = 0.0;   // >= 0, forward-only rail motion
  double yaw_rate = 0.0;
  double timestamp = 0.0;
};

enum class FixMode
{
  GnssAided,
  DeadReckoning
};

/// One-dimensional position on the allocated track.
struct TrackFix
{
  double s = 0.0;
  double v = 0.0;
  FixMode mode = FixMode::GnssAided;
  double position_std = 0.0;
};

inline constexpr double kOffTrackThreshold = 10.0;
inline constexpr double kDefaultDriftRate = 0.05;
inline constexpr double kMonotoneTolerance = 0.05;

/// Throws OffTrackError when the pose is more than 10 m from the centreline.
TrackFix project_to_track(const map::TrackMap& map, const Pose2D& pose, double position_std = 0.01);

/// Integrates measured speed along the track; s is clamped to [0, track_length].
TrackFix dead_reckon(const TrackFix& prev, double speed_meas, double dt, double track_length,
                     double drift_rate = kDefaultDriftRate);

struct DropoutWindow
{
  double t_start = 0.0;
  double t_end = 0.0;
  bool contains(double t) const { return t >= t_start && t <= t_end; }
};

struct InsConfig
{
  double position_std = 0.01;
  double velocity_std = 0.05 / 3.6;
  double heading_std = 0.1 * 3.14159265358979323846 / 180.0;
  double odometry_std = 0.02;
  double drift_rate = kDefaultDriftRate;
  std::vector<DropoutWindow> dropouts;
};

struct InsMeasurement
{
  Pose2D pose;
  bool gnss_valid = true;
};

/// Gaussian perturbation of the true pose. Inside a dropout window the
/// measurement is flagged no-GNSS and only the odometry speed is meaningful.
InsMeasurement simulate_ins(const Pose2D& truth, const InsConfig& config, std::mt19937_64& rng);

struct MonotoneResult
{
  double s = 0.0;
  bool backward_jump = false;
};

/// Absorbs backward jitter up to `tol`; larger backward jumps are accepted
/// as corrections and flagged.
MonotoneResult monotone_chainage(double prev_s, double new_s, double tol = kMonotoneTolerance);

/// Per-tick localisation: GNSS projection when available, dead reckoning otherwise.
class Localizer
{
public:
  Localizer(const map::TrackMap& map, InsConfig config, TrackFix initial);

  TrackFix update(const InsMeasurement& meas, double dt);
  const TrackFix& fix() const { return fix_; }
  bool last_backward_jump() const { return backward_jump_; }

private:
  const map::TrackMap* map_;
  InsConfig config_;
  TrackFix fix_;
  bool backward_jump_ = false;
};

} // namespace tram::loc
