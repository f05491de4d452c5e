#include "tram/signal_planner.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "tram/errors.hpp"

namespace tram::signal
{

namespace
{
constexpr double kStandstill = 0.1; // m/s
}

bool cannot_stop(const loc::TrackFix& vehicle, double stop_point_s, double a_service)
{
  if (!(a_service > 0.0))
    throw InvalidInput("commit_rule needs a_service > 0");
  return vehicle.s + vehicle.v * vehicle.v / (2.0 * a_service) > stop_point_s;
}

CommitDecision commit_rule(const loc::TrackFix& vehicle, double stop_point_s, double commit_point_s, double a_service)
{
  if (cannot_stop(vehicle, stop_point_s, a_service) || vehicle.s > commit_point_s)
    return CommitDecision::Proceed;
  return CommitDecision::StopAtSignal;
}

StopCommitPoints default_stop_and_commit(double signal_pos_s, const StopCommitConfig& config)
{
  StopCommitPoints pts;
  pts.stop_point_s = signal_pos_s - config.stop_offset;
  pts.commit_point_s = pts.stop_point_s - config.commit_gap;
  if (pts.stop_point_s < 0.0 || pts.commit_point_s < 0.0)
  {
    spdlog::warn("signal at s={} too close to track start, stop/commit points clamped to 0", signal_pos_s);
    pts.stop_point_s = std::max(0.0, pts.stop_point_s);
    pts.commit_point_s = std::max(0.0, pts.commit_point_s);
    pts.clamped = true;
  }
  return pts;
}

SignalMalResult signal_mal(const loc::TrackFix& vehicle, const map::DigitalHorizon& horizon,
                           const SignalStates& states, double a_service,
                           const std::set<std::string, std::less<>>& committed,
                           const std::set<std::string, std::less<>>& held)
{
  SignalMalResult result;
  result.mal = {horizon.end_s, MalSource::TrackEnd};

  for (const auto& ev : horizon.events)
  {
    const auto* sig = ev.element.signal();
    if (!sig)
      continue;

    SignalDecision d;
    d.signal_id = sig->signal_id;
    d.stop_point_s = sig->stop_point_s;
    if (const auto it = states.find(sig->signal_id); it != states.end())
      d.state = it->second;

    if (committed.contains(sig->signal_id))
    {
      d.decision = CommitDecision::Proceed;
      d.latched = true;
    }
    else if (d.state && is_go_state(*d.state))
    {
      const bool route_ok = std::find(sig->allowed_go_states.begin(), sig->allowed_go_states.end(), *d.state) !=
                            sig->allowed_go_states.end();
      d.decision = route_ok ? CommitDecision::Proceed : CommitDecision::StopAtSignal;
    }
    else if (d.state == SignalState::GetReady)
    {
      d.decision = held.contains(sig->signal_id)
                     ? (cannot_stop(vehicle, sig->stop_point_s, a_service) ? CommitDecision::Proceed
                                                                           : CommitDecision::StopAtSignal)
                     : commit_rule(vehicle, sig->stop_point_s, sig->commit_point_s, a_service);
    }
    else
    {
      d.decision = CommitDecision::StopAtSignal;
    }
    result.decisions.push_back(d);

    if (d.decision == CommitDecision::StopAtSignal)
    {
      if (sig->stop_point_s < vehicle.s)
      {
        result.fault = PassedSignalFault{sig->signal_id, sig->stop_point_s, vehicle.s};
        result.mal = {vehicle.s, MalSource::Signal};
      }
      else
      {
        result.mal = {sig->stop_point_s, MalSource::Signal};
      }
      break;
    }
  }
  return result;
}

SignalMalResult SignalPlanner::plan(const loc::TrackFix& vehicle, const map::DigitalHorizon& horizon,
                                    const SignalStates& states)
{
  // An earlier authorisation only holds while the stop point is out of
  // braking reach; a one-frame false GO past the commit point must not pull
  // the vehicle through. A vehicle standing between commit and stop point
  // has shown it can stop, so GET_READY no longer commits it by position.
  std::set<std::string, std::less<>> in_horizon;
  std::set<std::string, std::less<>> committed;
  for (const auto& ev : horizon.events)
  {
    const auto* sig = ev.element.signal();
    if (!sig)
      continue;
    in_horizon.insert(sig->signal_id);
    if (vehicle.v <= kStandstill && vehicle.s > sig->commit_point_s && vehicle.s <= sig->stop_point_s)
      held_.insert(sig->signal_id);
    if (authorized_.contains(sig->signal_id) && cannot_stop(vehicle, sig->stop_point_s, a_service_))
      committed.insert(sig->signal_id);
  }
  std::erase_if(held_, [&](const std::string& id) { return !in_horizon.contains(id); });

  auto result = signal_mal(vehicle, horizon, states, a_service_, committed, held_);

  authorized_.clear();
  for (const auto& d : result.decisions)
    if (d.decision == CommitDecision::Proceed)
      authorized_.insert(d.signal_id);
  return result;
}

} // namespace tram::signal
