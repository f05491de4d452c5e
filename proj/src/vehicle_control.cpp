#include "tram/vehicle_control.hpp"

#include <algorithm>
#include <cmath>

#include "tram/errors.hpp"

namespace tram::control
{

void VehicleParams::validate() const
{
  if (!(length > 0.0 && width > 0.0 && height > 0.0 && a_max > 0.0 && a_service > 0.0 && v_max > 0.0))
    throw InvalidInput("vehicle parameters must all be positive");
}

double braking_distance(double v, double a)
{
  if (!(a > 0.0))
    throw InvalidInput("braking_distance needs a > 0");
  if (v < 0.0)
    throw InvalidInput("braking_distance needs v >= 0");
  return v * v / (2.0 * a);
}

namespace
{

int priority(MalSource s)
{
  switch (s)
  {
  case MalSource::Signal: return 0;
  case MalSource::Obstacle: return 1;
  case MalSource::TrackEnd: return 2;
  }
  return 3;
}

} // namespace

MovementAuthorityLimit arbitrate_mal(const MovementAuthorityLimit& a, const MovementAuthorityLimit& b)
{
  if (a.limit_s != b.limit_s)
    return a.limit_s < b.limit_s ? a : b;
  return priority(a.source) <= priority(b.source) ? a : b;
}

double one_step_limit(double u, double d, double a_b, double dt)
{
  const double ad = a_b * dt;
  const double arg = ad * ad + u * u + 2.0 * a_b * d;
  if (arg <= 0.0)
    return 0.0;
  return std::max(0.0, -ad + std::sqrt(arg));
}

std::pair<double, double> crossing_approach_zone(const map::InfrastructureElement& crossing,
                                                 const VehicleParams& params)
{
  return {crossing.s_start - braking_distance(params.v_max, params.a_service), crossing.s_end};
}

double active_speed_limit(const map::TrackMap& map, double s, const VehicleParams& params,
                          const ControlConfig& config)
{
  double limit = params.v_max;
  for (const auto& e : map.elements())
  {
    if (const auto* sl = e.speed_limit(); sl && s >= e.s_start && s <= e.s_end)
      limit = std::min(limit, sl->limit);
    if (e.is_crossing())
    {
      const auto [z0, z1] = crossing_approach_zone(e, params);
      if (s >= z0 && s <= z1)
        limit = std::min(limit, config.crossing_limit);
    }
  }
  return limit;
}

namespace
{
constexpr double kStandstill = 0.1; // m/s, above the speed-sensor noise at rest
}

Controller::Controller(const map::TrackMap& map, VehicleParams params, ControlConfig config)
  : map_(&map), params_(params), config_(config)
{
  params_.validate();
  if (!(config_.eps_stop >= 0.0 && config_.dwell_time >= 0.0 && config_.crossing_limit > 0.0 &&
        config_.mal_decel_ratio > 0.0 && config_.mal_decel_ratio <= 1.0))
    throw InvalidInput(
      "control config needs eps_stop >= 0, dwell_time >= 0, crossing_limit > 0, mal_decel_ratio in (0, 1]");
}

DriveCommand Controller::command(const loc::TrackFix& vehicle, const MovementAuthorityLimit& mal,
                                 const map::DigitalHorizon& horizon, double dt)
{
  if (!(dt > 0.0))
    throw InvalidInput("command needs dt > 0");
  const double a_b = params_.a_service;
  const double full_stop = std::max(-a_b, -vehicle.v / dt);
  constraints_.clear();

  if (dwelling_)
  {
    dwell_elapsed_ += dt;
    if (dwell_elapsed_ + 1e-9 < config_.dwell_time)
      return {full_stop};
    served_.insert(dwell_platform_);
    dwelling_ = false;
  }

  if (mal.limit_s < vehicle.s)
    return {-a_b};

  constraints_.push_back({0.0, active_speed_limit(*map_, vehicle.s, params_, config_), "limit"});

  for (const auto& ev : horizon.events)
  {
    const auto& e = ev.element;
    if (const auto* sl = e.speed_limit(); sl && e.s_start > vehicle.s)
      constraints_.push_back({e.s_start - vehicle.s, sl->limit, "speed_limit:" + e.id});
    if (e.is_crossing())
    {
      const double z0 = crossing_approach_zone(e, params_).first;
      if (z0 > vehicle.s)
        constraints_.push_back({z0 - vehicle.s, config_.crossing_limit, "crossing:" + e.id});
    }
    if (const auto* pf = e.platform(); pf && !served_.contains(e.id))
    {
      const double d = pf->stop_point_s - vehicle.s;
      if (d < -config_.platform_arrival_tolerance)
        continue;
      if (std::abs(d) <= config_.platform_arrival_tolerance && vehicle.v <= config_.platform_arrival_speed)
      {
        dwelling_ = true;
        dwell_platform_ = e.id;
        dwell_elapsed_ = 0.0;
        return {full_stop};
      }
      constraints_.push_back({std::max(0.0, d), 0.0, "platform:" + e.id});
    }
  }
  double target = params_.v_max;
  for (const auto& c : constraints_)
    target = std::min(target, c.distance > 0.0 ? one_step_limit(c.speed, c.distance, a_b, dt) : c.speed);

  double d_mal = std::max(0.0, mal.limit_s - vehicle.s - config_.eps_stop);
  if (vehicle.v <= kStandstill && d_mal < config_.restart_distance)
    d_mal = 0.0;
  constraints_.push_back({d_mal, 0.0, "mal:" + std::string(to_string(mal.source))});
  target = std::min(target, d_mal > 0.0 ? one_step_limit(0.0, d_mal, config_.mal_decel_ratio * a_b, dt) : 0.0);
  return {std::clamp((target - vehicle.v) / dt, -a_b, params_.a_max)};
}

PlantState integrate(const PlantState& state, double accel, double dt)
{
  PlantState next;
  next.v = std::max(0.0, state.v + accel * dt);
  next.s = state.s + next.v * dt;
  return next;
}

} // namespace tram::control
