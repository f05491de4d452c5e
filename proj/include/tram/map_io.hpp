#pragma once

#include <filesystem>
#include <istream>
#include <vector>

#include <json.hpp>

#include "tram/signal_planner.hpp"
#include "tram/track_map.hpp"

namespace tram::map
{

/// Reads a `x_m,y_m` CSV trajectory. Throws ParseError naming line and column.
std::vector<Point2d> read_trajectory_csv(std::istream& in);
std::vector<Point2d> read_trajectory_csv(const std::filesystem::path& path);

/// Parses an element array. Signals without surveyed stop/commit points
/// receive the planner defaults. Throws ValidationError listing JSON paths.
std::vector<InfrastructureElement> elements_from_json(const nlohmann::json& j,
                                                      const signal::StopCommitConfig& defaults = {},
                                                      const std::string& path = "$");

nlohmann::json to_json(const InfrastructureElement& e);
nlohmann::json to_json(const TrackMap& map);

/// Accepts either a serialized map (`points` + `elements`) or a raw
/// survey (`trajectory` + `tolerance` + `elements`).
TrackMap map_from_json(const nlohmann::json& j, const signal::StopCommitConfig& defaults = {},
                       const std::string& path = "$");

} // namespace tram::map
