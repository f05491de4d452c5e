#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tram/free_space.hpp"
#include "tram/localization.hpp"
#include "tram/obstacle_fusion.hpp"
#include "tram/obstacle_planner.hpp"
#include "tram/signal_filter.hpp"
#include "tram/signal_planner.hpp"
#include "tram/track_map.hpp"
#include "tram/vehicle_control.hpp"

namespace tram::sim
{

struct SignalPhase
{
  signal::SignalState state = signal::SignalState::Stop;
  double duration = 0.0;
};

/// Durations drawn uniformly from [min, max] for each phase of a random cycle.
struct RandomProgramSpec
{
  std::pair<double, double> stop{5.0, 20.0};
  std::pair<double, double> stop_registered{2.0, 5.0};
  std::pair<double, double> go{5.0, 20.0};
  double get_ready = 8.0;
  signal::SignalState go_state = signal::SignalState::GoStraight;
};

/// Timed state sequence. When `cycle` is set the sequence repeats, otherwise
/// the last phase holds forever. `offset` shifts the programme start.
struct SignalProgram
{
  std::vector<SignalPhase> phases;
  bool cycle = false;
  double offset = 0.0;
  std::optional<RandomProgramSpec> random;

  signal::SignalState state_at(double t) const;
};

/// Generates a cycling programme covering at least `horizon` seconds.
SignalProgram generate_program(const RandomProgramSpec& spec, double horizon, std::mt19937_64& rng);

struct Waypoint
{
  double t = 0.0; // relative to activation
  Point2d position = Point2d::Zero();
};

struct ActorSpec
{
  std::string id;
  fusion::ObjectClass cls = fusion::ObjectClass::Pedestrian;
  double footprint = 0.5; // radius
  double height = 1.7;
  std::optional<double> appear_time;
  std::optional<double> appear_distance; // near edge this far ahead of the tram front
  std::optional<double> lifetime;
  std::vector<Waypoint> waypoints;
};

struct CameraConfig
{
  double range = 100.0;
  double p_tp = 0.95;
  double p_conf = 0.0;
  double period = 0.1;
};

struct ObjectSensorConfig
{
  double range = 80.0;
  double period = 0.1;
  double p_detect = 0.95;
  double camera_sigma = 0.3;
  double camera_range_factor = 10.0;
  double lidar_sigma = 0.1;
  double radar_sigma = 0.3;
  double radar_velocity_sigma = 0.3;
  double clutter_per_100m = 0.0;
  double clutter_lateral = 3.5;
  bool camera = true;
  bool lidar = true;
  bool radar = true;
};

struct LidarConfig
{
  bool enabled = true;
  double range = 80.0;
  double period = 0.1;
  double mount_height = 3.0;
  int points_per_actor = 24;
  double noise_sigma = 0.02;
  int ground_points = 40;
  double vegetation_per_100m = 0.0;
  double vegetation_lateral = 1.3;
  double vegetation_height = 0.2;
};

struct SensorConfigs
{
  CameraConfig signal_camera;
  ObjectSensorConfig objects;
  LidarConfig lidar;
};

struct SignalFilterConfig
{
  signal::SensorModel model;
  signal::TransitionConfig transitions;
  double threshold = 0.9;
};

struct Scenario
{
  std::string name = "scenario";
  std::uint64_t seed = 0;
  double dt = 0.05;
  double duration = 60.0;
  std::shared_ptr<const map::TrackMap> map;

  control::VehicleParams vehicle;
  control::ControlConfig control;
  double initial_s = 0.0;
  double initial_v = 0.0;
  double lookahead = 200.0;

  loc::InsConfig localization;
  SignalFilterConfig signal_filter;
  signal::StopCommitConfig stop_commit;
  std::map<std::string, SignalProgram> signal_programs;

  SensorConfigs sensors;
  fusion::FusionConfig fusion;
  freespace::FreeSpaceConfig free_space;
  obstacle::ZoneConfig zones;
  obstacle::PlannerDynamics planner;
  double grid_margin = 2.0;

  std::vector<ActorSpec> actors;
};

/// Parses and validates a scenario document. Every problem is reported with
/// its JSON path in a single ValidationError. Relative map file references
/// resolve against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Reads a scenario file; unreadable or malformed JSON is a ValidationError.
Scenario load_scenario(const std::filesystem::path& path);

} // namespace tram::sim
