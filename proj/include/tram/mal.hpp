#pragma once

#include <string_view>

namespace tram
{

enum class MalSource
{
  Signal,
  Obstacle,
  TrackEnd
};

constexpr std::string_view to_string(MalSource s)
{
  switch (s)
  {
  case MalSource::Signal: return "Signal";
  case MalSource::Obstacle: return "Obstacle";
  case MalSource::TrackEnd: return "TrackEnd";
  }
  return "?";
}

/// Absolute chainage the vehicle must not pass.
struct MovementAuthorityLimit
{
  double limit_s = 0.0;
  MalSource source = MalSource::TrackEnd;
};

} // namespace tram
