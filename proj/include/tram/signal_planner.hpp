#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tram/localization.hpp"
#include "tram/mal.hpp"
#include "tram/signal_types.hpp"
#include "tram/track_map.hpp"

namespace tram::signal
{

/// Filtered signal state; nullopt means UNRESOLVED.
using ResolvedState = std::optional<SignalState>;
using SignalStates = std::map<std::string, ResolvedState, std::less<>>;

enum class CommitDecision
{
  StopAtSignal,
  Proceed
};

/// Proceed iff the vehicle is past the commit point or cannot stop before the stop point.
CommitDecision commit_rule(const loc::TrackFix& vehicle, double stop_point_s, double commit_point_s, double a_service);

struct StopCommitConfig
{
  double stop_offset = 5.0;
  double commit_gap = 10.0;
};

struct StopCommitPoints
{
  double stop_point_s = 0.0;
  double commit_point_s = 0.0;
  bool clamped = false;
};

/// Defaults for signals whose stop and commit points were not surveyed.
StopCommitPoints default_stop_and_commit(double signal_pos_s, const StopCommitConfig& config = {});

struct SignalDecision
{
  std::string signal_id;
  ResolvedState state;
  CommitDecision decision = CommitDecision::StopAtSignal;
  double stop_point_s = 0.0;
  bool latched = false;
};

struct PassedSignalFault
{
  std::string signal_id;
  double stop_point_s = 0.0;
  double vehicle_s = 0.0;
};

struct SignalMalResult
{
  MovementAuthorityLimit mal;
  std::vector<SignalDecision> decisions; // signals evaluated, nearest first
  std::optional<PassedSignalFault> fault;
};

/// MAL from the nearest signal(s) in the horizon. A GO state outside the
/// route's allowed set is treated as a stop demand. Signals in `committed`
/// are passed regardless of their filtered state. For signals in `held` the
/// vehicle has already stopped past the commit point, so GET_READY only
/// proceeds when the stop point is out of braking reach.
SignalMalResult signal_mal(const loc::TrackFix& vehicle, const map::DigitalHorizon& horizon,
                           const SignalStates& states, double a_service,
                           const std::set<std::string, std::less<>>& committed = {},
                           const std::set<std::string, std::less<>>& held = {});

/// The braking half of commit_rule: true when the stop point is out of reach.
bool cannot_stop(const loc::TrackFix& vehicle, double stop_point_s, double a_service);

/// Stateful wrapper: once a signal has been authorised and the vehicle can
/// no longer stop for it, the authorisation holds until the signal is passed.
class SignalPlanner
{
public:
  explicit SignalPlanner(double a_service) : a_service_(a_service) {}

  SignalMalResult plan(const loc::TrackFix& vehicle, const map::DigitalHorizon& horizon, const SignalStates& states);

private:
  double a_service_;
  std::set<std::string, std::less<>> authorized_;
  std::set<std::string, std::less<>> held_; // stopped between commit and stop point

};

} // namespace tram::signal
