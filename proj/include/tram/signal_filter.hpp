#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tram/signal_types.hpp"
#include "tram/track_map.hpp"

namespace tram::signal
{

struct ChamberDetection
{
  ChamberLabel label = ChamberLabel::EMPTY;
  double confidence = 1.0;
};

/// Per-chamber detector model: P(detected lit | lit) and P(detected lit | unlit).
struct SensorModel
{
  double p_tp = 0.9;
  double p_fp = 0.05;
};

/// Cyclic STOP -> STOP_REGISTERED -> GO_x -> GET_READY -> STOP chain.
struct TransitionConfig
{
  double step = 0.1;      // seconds per matrix application
  double forward = 0.05;  // mass moved to the next phase per step
  double epsilon = 1e-4;  // leak to every other state
};

/// Distribution over the states a particular signal can show.
class SignalBelief
{
public:
  SignalBelief() = default;
  /// Uniform over `states`.
  SignalBelief(std::string signal_id, std::vector<SignalState> states);
  SignalBelief(std::string signal_id, std::vector<SignalState> states, Eigen::VectorXd probabilities);

  const std::string& signal_id() const { return signal_id_; }
  const std::vector<SignalState>& states() const { return states_; }
  const Eigen::VectorXd& probabilities() const { return p_; }
  std::size_t size() const { return states_.size(); }

  /// Zero for states outside the support.
  double probability(SignalState s) const;
  std::optional<std::size_t> index_of(SignalState s) const;

private:
  std::string signal_id_;
  std::vector<SignalState> states_;
  Eigen::VectorXd p_;
};

/// Drops labels the signal cannot show. EMPTY always passes.
std::vector<ChamberDetection> plausibility_gate(std::span<const ChamberDetection> detections,
                                                const map::SignalInfo& descriptor);

/// Row-stochastic one-step matrix, T(i, j) = P(next = j | now = i).
Eigen::MatrixXd transition_matrix(const std::vector<SignalState>& states, const TransitionConfig& config);

/// belief' = T(dt)^T belief, where T(dt) interpolates between integer
/// powers of the one-step matrix so it stays stochastic for any dt >= 0.
SignalBelief predict(const SignalBelief& belief, double dt, const Eigen::MatrixXd& step_matrix, double step);
SignalBelief predict(const SignalBelief& belief, double dt, const TransitionConfig& config);

/// Bayes update with one frame of gated detections. An empty frame means the
/// signal was not observed and leaves the belief unchanged. Duplicate labels
/// in one frame count once.
SignalBelief update(const SignalBelief& belief, std::span<const ChamberDetection> detections,
                    const SensorModel& model);

/// Per-state likelihood of the frame, in belief state order.
Eigen::VectorXd frame_likelihood(const std::vector<SignalState>& states,
                                 std::span<const ChamberDetection> detections, const SensorModel& model);

/// Argmax state when its probability reaches `threshold`, otherwise nullopt (UNRESOLVED).
std::optional<SignalState> map_state(const SignalBelief& belief, double threshold);

} // namespace tram::signal
