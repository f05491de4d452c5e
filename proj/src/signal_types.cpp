#include "tram/signal_types.hpp"

#include <algorithm>

namespace tram::signal
{

namespace
{

constexpr std::array<std::string_view, kLabelCount> kLabelNames{"A",  "F0", "F1",  "F2",  "F3",
                                                                 "F4", "W0", "W12", "W13", "EMPTY"};
constexpr std::array<std::string_view, kSignalStateCount> kStateNames{
  "STOP",    "STOP_REGISTERED", "GET_READY", "GO_STRAIGHT", "GO_RIGHT", "GO_LEFT", "SWITCH_LOCKED_RIGHT",
  "SWITCH_LOCKED_LEFT"};

} // namespace

std::string_view to_string(ChamberLabel c)
{
  return kLabelNames[static_cast<std::size_t>(c)];
}

std::string_view to_string(SignalState s)
{
  return kStateNames[static_cast<std::size_t>(s)];
}

std::string_view to_string(SignalClass c)
{
  return c == SignalClass::StopGo ? "StopGo" : "Switch";
}

std::optional<ChamberLabel> parse_chamber_label(std::string_view s)
{
  const auto it = std::find(kLabelNames.begin(), kLabelNames.end(), s);
  if (it == kLabelNames.end())
    return std::nullopt;
  return static_cast<ChamberLabel>(std::distance(kLabelNames.begin(), it));
}

std::optional<SignalState> parse_signal_state(std::string_view s)
{
  const auto it = std::find(kStateNames.begin(), kStateNames.end(), s);
  if (it == kStateNames.end())
    return std::nullopt;
  return static_cast<SignalState>(std::distance(kStateNames.begin(), it));
}

std::optional<SignalClass> parse_signal_class(std::string_view s)
{
  if (s == "StopGo")
    return SignalClass::StopGo;
  if (s == "Switch")
    return SignalClass::Switch;
  return std::nullopt;
}

std::vector<SignalState> default_possible_states(SignalClass cls, const std::vector<SignalState>& allowed_go)
{
  std::vector<SignalState> states;
  if (cls == SignalClass::Switch)
  {
    states = {SignalState::SwitchLockedRight, SignalState::SwitchLockedLeft};
    return states;
  }
  states = {SignalState::Stop, SignalState::StopRegistered, SignalState::GetReady};
  for (auto g : {SignalState::GoStraight, SignalState::GoRight, SignalState::GoLeft})
    if (std::find(allowed_go.begin(), allowed_go.end(), g) != allowed_go.end())
      states.push_back(g);
  if (states.size() == 3)
    states.push_back(SignalState::GoStraight);
  return states;
}

ChamberSet chamber_set(const std::vector<SignalState>& states)
{
  ChamberSet set = 0;
  for (auto s : states)
    set |= emission_template(s);
  return set;
}

} // namespace tram::signal
