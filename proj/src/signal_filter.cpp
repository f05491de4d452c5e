#include "tram/signal_filter.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "tram/errors.hpp"

namespace tram::signal
{

namespace
{

// Phases of the cyclic signal programme; successors are the next non-empty phase.
const std::vector<std::vector<SignalState>>& stop_go_phases()
{
  static const std::vector<std::vector<SignalState>> phases{
    {SignalState::Stop},
    {SignalState::StopRegistered},
    {SignalState::GoStraight, SignalState::GoRight, SignalState::GoLeft},
    {SignalState::GetReady},
  };
  return phases;
}

const std::vector<std::vector<SignalState>>& switch_phases()
{
  static const std::vector<std::vector<SignalState>> phases{
    {SignalState::SwitchLockedRight},
    {SignalState::SwitchLockedLeft},
  };
  return phases;
}

bool contains(const std::vector<SignalState>& v, SignalState s)
{
  return std::find(v.begin(), v.end(), s) != v.end();
}

} // namespace

SignalBelief::SignalBelief(std::string signal_id, std::vector<SignalState> states)
  : signal_id_(std::move(signal_id)), states_(std::move(states))
{
  if (states_.empty())
    throw InvalidInput("signal belief needs at least one state");
  p_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(states_.size()), 1.0 / static_cast<double>(states_.size()));
}

SignalBelief::SignalBelief(std::string signal_id, std::vector<SignalState> states, Eigen::VectorXd probabilities)
  : signal_id_(std::move(signal_id)), states_(std::move(states)), p_(std::move(probabilities))
{
  if (states_.empty() || static_cast<std::size_t>(p_.size()) != states_.size())
    throw InvalidInput("signal belief size mismatch");
  if ((p_.array() < 0.0).any() || std::abs(p_.sum() - 1.0) > 1e-9)
    throw InvalidInput("signal belief is not a probability distribution");
}

std::optional<std::size_t> SignalBelief::index_of(SignalState s) const
{
  const auto it = std::find(states_.begin(), states_.end(), s);
  if (it == states_.end())
    return std::nullopt;
  return static_cast<std::size_t>(std::distance(states_.begin(), it));
}

double SignalBelief::probability(SignalState s) const
{
  const auto i = index_of(s);
  return i ? p_(static_cast<Eigen::Index>(*i)) : 0.0;
}

std::vector<ChamberDetection> plausibility_gate(std::span<const ChamberDetection> detections,
                                                const map::SignalInfo& descriptor)
{
  const ChamberSet allowed = chamber_set(descriptor.possible_states.empty()
                                           ? default_possible_states(descriptor.signal_class,
                                                                     descriptor.allowed_go_states)
                                           : descriptor.possible_states);
  std::vector<ChamberDetection> kept;
  kept.reserve(detections.size());
  for (const auto& d : detections)
    if (d.label == ChamberLabel::EMPTY || (allowed & chamber_bit(d.label)) != 0)
      kept.push_back(d);
  return kept;
}

Eigen::MatrixXd transition_matrix(const std::vector<SignalState>& states, const TransitionConfig& config)
{
  const auto n = static_cast<Eigen::Index>(states.size());
  const bool is_switch =
    std::any_of(states.begin(), states.end(), [](SignalState s) {
      return s == SignalState::SwitchLockedLeft || s == SignalState::SwitchLockedRight;
    });

  std::vector<std::vector<SignalState>> phases;
  for (const auto& phase : is_switch ? switch_phases() : stop_go_phases())
  {
    std::vector<SignalState> present;
    for (auto s : phase)
      if (contains(states, s))
        present.push_back(s);
    if (!present.empty())
      phases.push_back(std::move(present));
  }

  auto phase_of = [&](SignalState s) -> std::size_t {
    for (std::size_t k = 0; k < phases.size(); ++k)
      if (contains(phases[k], s))
        return k;
    return 0;
  };

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const std::size_t next_phase = (phase_of(states[static_cast<std::size_t>(i)]) + 1) % phases.size();
    const auto& successors = phases[next_phase];
    const bool cycles = phases.size() > 1;
    double row_mass = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
    {
      if (j == i)
        continue;
      const bool is_successor = cycles && contains(successors, states[static_cast<std::size_t>(j)]);
      T(i, j) = is_successor ? config.forward / static_cast<double>(successors.size()) : config.epsilon;
      row_mass += T(i, j);
    }
    T(i, i) = 1.0 - row_mass;
  }
  if ((T.array() < 0.0).any())
    throw InvalidInput("transition parameters produce negative self-loop probability");
  return T;
}

SignalBelief predict(const SignalBelief& belief, double dt, const Eigen::MatrixXd& step_matrix, double step)
{
  if (dt < 0.0 || !(step > 0.0))
    throw InvalidInput("predict needs dt >= 0 and step > 0");
  const double steps = dt / step;
  const auto whole = static_cast<long>(std::floor(steps + 1e-9));
  const double frac = std::max(0.0, steps - static_cast<double>(whole));

  Eigen::VectorXd p = belief.probabilities();
  for (long k = 0; k < whole; ++k)
    p = step_matrix.transpose() * p;
  if (frac > 1e-9)
    p = (1.0 - frac) * p + frac * (step_matrix.transpose() * p);
  p /= p.sum();
  return SignalBelief(belief.signal_id(), belief.states(), std::move(p));
}

SignalBelief predict(const SignalBelief& belief, double dt, const TransitionConfig& config)
{
  return predict(belief, dt, transition_matrix(belief.states(), config), config.step);
}

Eigen::VectorXd frame_likelihood(const std::vector<SignalState>& states, std::span<const ChamberDetection> detections,
                                 const SensorModel& model)
{
  const ChamberSet chambers = chamber_set(states);
  ChamberSet observed = 0;
  for (const auto& d : detections)
    if (d.label != ChamberLabel::EMPTY)
      observed |= chamber_bit(d.label);
  observed &= chambers;

  Eigen::VectorXd like(static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k)
  {
    const ChamberSet lit = emission_template(states[k]);
    double l = 1.0;
    for (std::size_t c = 0; c < kLitChamberCount; ++c)
    {
      const auto bit = static_cast<ChamberSet>(1u << c);
      if ((chambers & bit) == 0)
        continue;
      const bool seen = (observed & bit) != 0;
      const bool on = (lit & bit) != 0;
      if (seen)
        l *= on ? model.p_tp : model.p_fp;
      else
        l *= on ? 1.0 - model.p_tp : 1.0 - model.p_fp;
    }
    like(static_cast<Eigen::Index>(k)) = l;
  }
  return like;
}

SignalBelief update(const SignalBelief& belief, std::span<const ChamberDetection> detections, const SensorModel& model)
{
  if (!(model.p_tp > 0.0 && model.p_tp < 1.0 && model.p_fp >= 0.0 && model.p_fp < model.p_tp))
    throw InvalidInput("sensor model needs 0 < p_tp < 1 and 0 <= p_fp < p_tp");
  if (detections.empty())
    return belief;

  Eigen::VectorXd post = belief.probabilities().cwiseProduct(frame_likelihood(belief.states(), detections, model));
  const double total = post.sum();
  if (!(total > 0.0) || !std::isfinite(total))
  {
    spdlog::warn("signal {}: contradictory evidence, belief reset to uniform", belief.signal_id());
    return SignalBelief(belief.signal_id(), belief.states());
  }
  post /= total;
  return SignalBelief(belief.signal_id(), belief.states(), std::move(post));
}

std::optional<SignalState> map_state(const SignalBelief& belief, double threshold)
{
  if (!(threshold > 0.5 && threshold < 1.0))
    throw InvalidInput("map_state threshold must lie in (0.5, 1)");
  Eigen::Index best = 0;
  belief.probabilities().maxCoeff(&best);
  if (belief.probabilities()(best) >= threshold)
    return belief.states()[static_cast<std::size_t>(best)];
  return std::nullopt;
}

} // namespace tram::signal
