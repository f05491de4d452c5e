#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tram/event_log.hpp"
#include "tram/metrics.hpp"
#include "tram/scenario.hpp"
#include "tram/sensors.hpp"

namespace tram::sim
{

struct RunOptions
{
  std::optional<std::uint64_t> seed;
  std::optional<bool> conservative_freespace;
  bool keep_log = true;
};

enum class RunStatus
{
  Ok,
  SafetyFault
};

struct RunResult
{
  RunStatus status = RunStatus::Ok;
  EventLog log;
  MetricsReport metrics;

  int exit_code() const { return status == RunStatus::Ok ? 0 : 3; }
};

/// Fixed-step closed loop. Each tick: actors and signal programmes, sensor
/// synthesis, localisation, signal handling, obstacle handling, MAL
/// arbitration, control, plant integration, logging. All randomness comes
/// from one generator seeded from the scenario (or the override).
class Simulator
{
public:
  explicit Simulator(Scenario scenario, RunOptions options = {});

  /// Advances one tick; false once the run has ended or halted.
  bool step();

  /// Runs to completion and closes the log.
  RunResult run();

  double time() const { return t_; }
  const control::PlantState& truth() const { return plant_; }
  const MovementAuthorityLimit& mal() const { return mal_; }
  bool halted() const { return halted_; }
  const Scenario& scenario() const { return sc_; }

private:
  struct SignalTrack
  {
    const map::InfrastructureElement* element = nullptr;
    signal::SignalBelief belief;
    Eigen::MatrixXd step_matrix;
    signal::ChamberSet chambers = 0;
  };

  struct ActorRuntime
  {
    ActorSpec spec;
    double near_s = 0.0; // chainage of the first waypoint
    std::optional<double> activated_at;
    bool expired = false;
    bool margin_checked = false;
  };

  loc::Pose2D truth_pose() const;
  std::vector<ActorState> advance_actors();
  std::optional<double> truth_margin(std::span<const ActorState> actors) const;
  bool obstacle_ahead_truth(std::span<const ActorState> actors) const;
  void event(nlohmann::json record);
  void emit(nlohmann::json record);
  void close();

  Scenario sc_;
  RunOptions options_;
  std::mt19937_64 rng_;
  EventLog log_;
  MetricsAccumulator metrics_;

  std::map<std::string, SignalProgram> programs_;
  std::vector<SignalTrack> signals_;
  std::vector<ActorRuntime> actors_;
  std::vector<StaticObject> poles_;
  std::vector<StaticObject> vegetation_;

  loc::Localizer localizer_;
  signal::SignalPlanner planner_;
  fusion::Tracker tracker_;
  control::Controller controller_;
  std::vector<freespace::OccupiedPolygon> polygons_;

  control::PlantState plant_;
  MovementAuthorityLimit mal_;
  double t_ = 0.0;
  std::size_t tick_ = 0;
  std::size_t total_ticks_ = 0;
  bool halted_ = false;
  bool closed_ = false;
  bool was_dwelling_ = false;
  std::vector<double> stop_positions_;
  std::map<std::string, bool> truth_commit_;
};

/// Convenience wrapper: build, run, return.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

} // namespace tram::sim
