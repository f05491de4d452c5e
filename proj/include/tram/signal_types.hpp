#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tram::signal
{

/// Per-chamber detector classes. EMPTY marks a visible but unlit chamber.
enum class ChamberLabel : std::uint8_t
{
  A,
  F0,
  F1,
  F2,
  F3,
  F4,
  W0,
  W12,
  W13,
  EMPTY
};

inline constexpr std::size_t kLitChamberCount = 9;
inline constexpr std::size_t kLabelCount = 10;

/// Physically consistent chamber combinations of a tram signal.
enum class SignalState : std::uint8_t
{
  Stop,              // F0
  StopRegistered,    // F0 + A
  GetReady,          // F4
  GoStraight,        // F1
  GoRight,           // F2
  GoLeft,            // F3
  SwitchLockedRight, // W0 + W12
  SwitchLockedLeft   // W0 + W13
};

inline constexpr std::size_t kSignalStateCount = 8;

enum class SignalClass : std::uint8_t
{
  StopGo,
  Switch
};

/// Bitmask over lit chambers, bit i for ChamberLabel(i).
using ChamberSet = std::uint16_t;

constexpr ChamberSet chamber_bit(ChamberLabel c)
{
  return static_cast<ChamberSet>(1u << static_cast<unsigned>(c));
}

constexpr ChamberSet emission_template(SignalState s)
{
  switch (s)
  {
  case SignalState::Stop: return chamber_bit(ChamberLabel::F0);
  case SignalState::StopRegistered: return chamber_bit(ChamberLabel::F0) | chamber_bit(ChamberLabel::A);
  case SignalState::GetReady: return chamber_bit(ChamberLabel::F4);
  case SignalState::GoStraight: return chamber_bit(ChamberLabel::F1);
  case SignalState::GoRight: return chamber_bit(ChamberLabel::F2);
  case SignalState::GoLeft: return chamber_bit(ChamberLabel::F3);
  case SignalState::SwitchLockedRight: return chamber_bit(ChamberLabel::W0) | chamber_bit(ChamberLabel::W12);
  case SignalState::SwitchLockedLeft: return chamber_bit(ChamberLabel::W0) | chamber_bit(ChamberLabel::W13);
  }
  return 0;
}

constexpr bool is_go_state(SignalState s)
{
  return s == SignalState::GoStraight || s == SignalState::GoRight || s == SignalState::GoLeft ||
         s == SignalState::SwitchLockedRight || s == SignalState::SwitchLockedLeft;
}

constexpr bool demands_stop(SignalState s)
{
  return s == SignalState::Stop || s == SignalState::StopRegistered;
}

std::string_view to_string(ChamberLabel c);
std::string_view to_string(SignalState s);
std::string_view to_string(SignalClass c);

std::optional<ChamberLabel> parse_chamber_label(std::string_view s);
std::optional<SignalState> parse_signal_state(std::string_view s);
std::optional<SignalClass> parse_signal_class(std::string_view s);

/// States a signal of the given class can show when the map omits an explicit list.
std::vector<SignalState> default_possible_states(SignalClass cls, const std::vector<SignalState>& allowed_go);

/// Union of the emission templates of `states`.
ChamberSet chamber_set(const std::vector<SignalState>& states);

} // namespace tram::signal
