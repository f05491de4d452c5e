#pragma once

#include <set>
#include <string>
#include <vector>

#include "tram/localization.hpp"
#include "tram/mal.hpp"
#include "tram/track_map.hpp"

namespace tram::control
{

struct VehicleParams
{
  double length = 26.0;
  double width = 2.3;
  double height = 3.5;
  double a_max = 1.3;
  double a_service = 1.2;
  double v_max = 50.0 / 3.6;

  void validate() const;
};

struct DriveCommand
{
  double accel = 0.0;
};

/// v^2 / (2a). Throws InvalidInput for a <= 0 or v < 0.
double braking_distance(double v, double a);

/// Smaller limit wins; on equal limits Signal beats Obstacle beats TrackEnd.
MovementAuthorityLimit arbitrate_mal(const MovementAuthorityLimit& a, const MovementAuthorityLimit& b);

struct ControlConfig
{
  double crossing_limit = 40.0 / 3.6;
  double eps_stop = 0.5;
  // MAL target curve brakes at this fraction of a_service, leaving room under
  // the supervision curve for MAL jitter from tracked obstacles
  double mal_decel_ratio = 0.9;
  // a vehicle standing short of its MAL stays put until the MAL is this far beyond the stop target
  double restart_distance = 1.0;
  double dwell_time = 20.0;
  double platform_arrival_tolerance = 0.25;
  double platform_arrival_speed = 0.1;
};

/// Speed v' allowed after one step of length dt such that the vehicle can
/// still reach speed u within distance d braking at a_b.
double one_step_limit(double u, double d, double a_b, double dt);

/// Lowest static limit at s: v_max, SpeedLimit elements and crossing approach zones.
double active_speed_limit(const map::TrackMap& map, double s, const VehicleParams& params,
                          const ControlConfig& config = {});

/// Crossing approach zone [s_start - braking_distance(v_max), s_end].
std::pair<double, double> crossing_approach_zone(const map::InfrastructureElement& crossing,
                                                 const VehicleParams& params);

struct SpeedConstraint
{
  double distance = 0.0; // ahead of the vehicle; 0 when already active
  double speed = 0.0;
  std::string reason;
};

/// Braking-curve speed supervisor with a platform dwell timer.
class Controller
{
public:
  Controller(const map::TrackMap& map, VehicleParams params, ControlConfig config = {});

  DriveCommand command(const loc::TrackFix& vehicle, const MovementAuthorityLimit& mal,
                       const map::DigitalHorizon& horizon, double dt);

  /// Constraints considered in the last command, for logging.
  const std::vector<SpeedConstraint>& constraints() const { return constraints_; }
  bool dwelling() const { return dwelling_; }
  const std::string& dwell_platform() const { return dwell_platform_; }
  const std::set<std::string>& served_platforms() const { return served_; }

private:
  const map::TrackMap* map_;
  VehicleParams params_;
  ControlConfig config_;
  std::vector<SpeedConstraint> constraints_;
  std::set<std::string> served_;
  bool dwelling_ = false;
  std::string dwell_platform_;
  double dwell_elapsed_ = 0.0;
};

/// Semi-implicit Euler step of the longitudinal plant; speed never goes negative.
struct PlantState
{
  double s = 0.0;
  double v = 0.0;
};
PlantState integrate(const PlantState& state, double accel, double dt);

} // namespace tram::control
