#include "tram/scenario.hpp"

#include <cmath>
#include <fstream>

#include "tram/errors.hpp"
#include "tram/map_io.hpp"

namespace tram::sim
{

using nlohmann::json;

signal::SignalState SignalProgram::state_at(double t) const
{
  if (phases.empty())
    return signal::SignalState::Stop;
  double local = t - offset;
  if (local < 0.0)
    return phases.front().state;
  double total = 0.0;
  for (const auto& p : phases)
    total += p.duration;
  if (cycle && total > 0.0)
    local = std::fmod(local, total);
  for (const auto& p : phases)
  {
    if (local < p.duration)
      return p.state;
    local -= p.duration;
  }
  return phases.back().state;
}

SignalProgram generate_program(const RandomProgramSpec& spec, double horizon, std::mt19937_64& rng)
{
  auto draw = [&rng](std::pair<double, double> range) {
    return std::uniform_real_distribution<double>(range.first, range.second)(rng);
  };
  SignalProgram prog;
  prog.cycle = false;
  double covered = 0.0;
  while (covered <= horizon)
  {
    const double stop = draw(spec.stop);
    const double reg = draw(spec.stop_registered);
    const double go = draw(spec.go);
    prog.phases.push_back({signal::SignalState::Stop, stop});
    prog.phases.push_back({signal::SignalState::StopRegistered, reg});
    prog.phases.push_back({spec.go_state, go});
    prog.phases.push_back({signal::SignalState::GetReady, spec.get_ready});
    covered += stop + reg + go + spec.get_ready;
  }
  prog.phases.push_back({signal::SignalState::Stop, 0.0});
  // start somewhere inside the first cycle
  prog.offset = -std::uniform_real_distribution<double>(0.0, prog.phases[0].duration + prog.phases[1].duration +
                                                                   prog.phases[2].duration + spec.get_ready)(rng);
  return prog;
}

namespace
{

class Reader
{
public:
  std::vector<std::string> issues;

  void add(const std::string& path, const std::string& what) { issues.push_back(path + ": " + what); }

  const json* object(const json& parent, const char* key, const std::string& path)
  {
    if (!parent.contains(key))
      return nullptr;
    const json& j = parent.at(key);
    if (!j.is_object())
    {
      add(path + "." + key, "expected object");
      return nullptr;
    }
    return &j;
  }

  /// Reads an optional number; `ok` checks the domain.
  template <typename Check>
  void number(const json& obj, const char* key, const std::string& path, double& out, Check ok,
              const char* requirement)
  {
    if (!obj.contains(key))
      return;
    const json& v = obj.at(key);
    if (!v.is_number())
    {
      add(path + "." + key, "expected number");
      return;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x) || !ok(x))
    {
      add(path + "." + key, requirement);
      return;
    }
    out = x;
  }

  void positive(const json& obj, const char* key, const std::string& path, double& out)
  {
    number(obj, key, path, out, [](double x) { return x > 0.0; }, "must be > 0");
  }

  void non_negative(const json& obj, const char* key, const std::string& path, double& out)
  {
    number(obj, key, path, out, [](double x) { return x >= 0.0; }, "must be >= 0");
  }

  void probability(const json& obj, const char* key, const std::string& path, double& out)
  {
    number(obj, key, path, out, [](double x) { return x >= 0.0 && x <= 1.0; }, "must lie in [0, 1]");
  }

  void flag(const json& obj, const char* key, const std::string& path, bool& out)
  {
    if (!obj.contains(key))
      return;
    if (!obj.at(key).is_boolean())
      add(path + "." + key, "expected boolean");
    else
      out = obj.at(key).get<bool>();
  }

  void count(const json& obj, const char* key, const std::string& path, int& out, int min)
  {
    if (!obj.contains(key))
      return;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < min)
      add(path + "." + key, "expected integer >= " + std::to_string(min));
    else
      out = static_cast<int>(v.get<long long>());
  }

  void range(const json& obj, const char* key, const std::string& path, std::pair<double, double>& out)
  {
    if (!obj.contains(key))
      return;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number() ||
        !(v[0].get<double>() > 0.0 && v[0].get<double>() <= v[1].get<double>()))
      add(path + "." + key, "expected [min, max] with 0 < min <= max");
    else
      out = {v[0].get<double>(), v[1].get<double>()};
  }
};

std::shared_ptr<const map::TrackMap> read_map(const json& j, const std::filesystem::path& base_dir,
                                              const signal::StopCommitConfig& defaults, Reader& r)
{
  if (!j.contains("map"))
  {
    r.add("$.map", "missing");
    return nullptr;
  }
  json doc = j.at("map");
  if (doc.is_string())
  {
    const auto file = base_dir / doc.get<std::string>();
    std::ifstream in(file);
    if (!in)
    {
      r.add("$.map", "cannot open " + file.string());
      return nullptr;
    }
    try
    {
      doc = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
      r.add("$.map", file.string() + ": " + e.what());
      return nullptr;
    }
  }
  try
  {
    return std::make_shared<const map::TrackMap>(map::map_from_json(doc, defaults, "$.map"));
  }
  catch (const ValidationError& e)
  {
    r.issues.insert(r.issues.end(), e.issues().begin(), e.issues().end());
  }
  return nullptr;
}

std::optional<signal::SignalState> read_state(const json& v)
{
  return v.is_string() ? signal::parse_signal_state(v.get<std::string>()) : std::nullopt;
}

SignalProgram read_program(const json& j, const std::string& path, Reader& r)
{
  SignalProgram prog;
  if (!j.is_object())
  {
    r.add(path, "expected object");
    return prog;
  }
  if (const json* rnd = r.object(j, "random", path))
  {
    RandomProgramSpec spec;
    const std::string p = path + ".random";
    r.range(*rnd, "stop", p, spec.stop);
    r.range(*rnd, "stop_registered", p, spec.stop_registered);
    r.range(*rnd, "go", p, spec.go);
    r.positive(*rnd, "get_ready", p, spec.get_ready);
    if (rnd->contains("go_state"))
    {
      const auto s = read_state(rnd->at("go_state"));
      if (!s || !signal::is_go_state(*s))
        r.add(p + ".go_state", "expected a GO state");
      else
        spec.go_state = *s;
    }
    prog.random = spec;
    return prog;
  }
  if (!j.contains("phases") || !j.at("phases").is_array() || j.at("phases").empty())
  {
    r.add(path + ".phases", "expected non-empty array");
    return prog;
  }
  const json& phases = j.at("phases");
  for (std::size_t i = 0; i < phases.size(); ++i)
  {
    const std::string p = path + ".phases[" + std::to_string(i) + "]";
    const json& ph = phases[i];
    if (!ph.is_object())
    {
      r.add(p, "expected object");
      continue;
    }
    SignalPhase phase;
    const auto s = ph.contains("state") ? read_state(ph.at("state")) : std::nullopt;
    if (!s)
      r.add(p + ".state", "unknown signal state");
    else
      phase.state = *s;
    phase.duration = -1.0;
    r.number(ph, "duration", p, phase.duration, [](double x) { return x > 0.0; }, "must be > 0");
    if (!ph.contains("duration"))
    {
      if (i + 1 == phases.size())
        phase.duration = 0.0; // last phase may hold forever
      else
        r.add(p + ".duration", "missing");
    }
    prog.phases.push_back(phase);
  }
  r.flag(j, "cycle", path, prog.cycle);
  r.number(j, "offset", path, prog.offset, [](double) { return true; }, "");
  return prog;
}

std::optional<Point2d> read_position(const json& w, const std::string& path, const map::TrackMap* map, Reader& r)
{
  if (w.contains("x") || w.contains("y"))
  {
    if (!w.value("x", json()).is_number() || !w.value("y", json()).is_number())
    {
      r.add(path, "x and y must both be numbers");
      return std::nullopt;
    }
    return Point2d(w.at("x").get<double>(), w.at("y").get<double>());
  }
  if (w.contains("s"))
  {
    if (!w.at("s").is_number() || (w.contains("lateral") && !w.at("lateral").is_number()))
    {
      r.add(path, "s and lateral must be numbers");
      return std::nullopt;
    }
    if (!map)
      return std::nullopt;
    const double s = w.at("s").get<double>();
    if (s < 0.0 || s > map->total_length())
    {
      r.add(path + ".s", "outside the track");
      return std::nullopt;
    }
    const auto pose = map->point_at(s);
    const double lat = w.value("lateral", 0.0);
    return pose.position + lat * Point2d(-std::sin(pose.heading), std::cos(pose.heading));
  }
  r.add(path, "expected x/y or s/lateral");
  return std::nullopt;
}

ActorSpec read_actor(const json& a, const std::string& path, const map::TrackMap* map, Reader& r)
{
  ActorSpec actor;
  if (!a.is_object())
  {
    r.add(path, "expected object");
    return actor;
  }
  actor.id = a.value("id", std::string{});
  if (actor.id.empty())
    r.add(path + ".id", "missing");
  if (a.contains("class"))
  {
    const auto cls = a.at("class").is_string() ? fusion::parse_object_class(a.at("class").get<std::string>())
                                               : std::nullopt;
    if (!cls || *cls == fusion::ObjectClass::Infrastructure)
      r.add(path + ".class", "expected Pedestrian, Car, Tram or Unknown");
    else
      actor.cls = *cls;
  }
  r.positive(a, "footprint", path, actor.footprint);
  r.positive(a, "height", path, actor.height);
  double v = 0.0;
  if (a.contains("appear_time"))
  {
    r.non_negative(a, "appear_time", path, v);
    actor.appear_time = v;
  }
  if (a.contains("appear_distance"))
  {
    r.positive(a, "appear_distance", path, v);
    actor.appear_distance = v;
  }
  if (a.contains("lifetime"))
  {
    r.positive(a, "lifetime", path, v);
    actor.lifetime = v;
  }
  if (!a.contains("waypoints") || !a.at("waypoints").is_array() || a.at("waypoints").empty())
  {
    r.add(path + ".waypoints", "expected non-empty array");
    return actor;
  }
  const json& wps = a.at("waypoints");
  for (std::size_t i = 0; i < wps.size(); ++i)
  {
    const std::string p = path + ".waypoints[" + std::to_string(i) + "]";
    if (!wps[i].is_object())
    {
      r.add(p, "expected object");
      continue;
    }
    Waypoint wp;
    r.non_negative(wps[i], "t", p, wp.t);
    if (!actor.waypoints.empty() && wp.t < actor.waypoints.back().t)
      r.add(p + ".t", "waypoint times must be non-decreasing");
    if (const auto pos = read_position(wps[i], p, map, r))
      wp.position = *pos;
    actor.waypoints.push_back(wp);
  }
  return actor;
}

} // namespace

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir)
{
  Reader r;
  Scenario sc;
  if (!j.is_object())
    throw ValidationError({"$: expected scenario object"});

  if (j.contains("name"))
  {
    if (!j.at("name").is_string())
      r.add("$.name", "expected string");
    else
      sc.name = j.at("name").get<std::string>();
  }
  if (j.contains("seed"))
  {
    if (!j.at("seed").is_number_unsigned())
      r.add("$.seed", "expected non-negative integer");
    else
      sc.seed = j.at("seed").get<std::uint64_t>();
  }
  r.positive(j, "dt", "$", sc.dt);
  r.positive(j, "duration", "$", sc.duration);
  r.positive(j, "lookahead", "$", sc.lookahead);

  if (const json* sp = r.object(j, "stop_commit", "$"))
  {
    r.non_negative(*sp, "stop_offset", "$.stop_commit", sc.stop_commit.stop_offset);
    r.non_negative(*sp, "commit_gap", "$.stop_commit", sc.stop_commit.commit_gap);
  }
  sc.map = read_map(j, base_dir, sc.stop_commit, r);

  if (const json* v = r.object(j, "vehicle", "$"))
  {
    const std::string p = "$.vehicle";
    r.positive(*v, "length", p, sc.vehicle.length);
    r.positive(*v, "width", p, sc.vehicle.width);
    r.positive(*v, "height", p, sc.vehicle.height);
    r.positive(*v, "a_max", p, sc.vehicle.a_max);
    r.positive(*v, "a_service", p, sc.vehicle.a_service);
    r.positive(*v, "v_max", p, sc.vehicle.v_max);
    r.non_negative(*v, "initial_s", p, sc.initial_s);
    r.non_negative(*v, "initial_v", p, sc.initial_v);
  }
  if (const json* c = r.object(j, "control", "$"))
  {
    const std::string p = "$.control";
    r.positive(*c, "crossing_limit", p, sc.control.crossing_limit);
    r.non_negative(*c, "eps_stop", p, sc.control.eps_stop);
    r.positive(*c, "mal_decel_ratio", p, sc.control.mal_decel_ratio);
    r.non_negative(*c, "restart_distance", p, sc.control.restart_distance);
    r.non_negative(*c, "dwell_time", p, sc.control.dwell_time);
  }
  if (const json* l = r.object(j, "localization", "$"))
  {
    const std::string p = "$.localization";
    r.non_negative(*l, "position_std", p, sc.localization.position_std);
    r.non_negative(*l, "velocity_std", p, sc.localization.velocity_std);
    r.non_negative(*l, "heading_std", p, sc.localization.heading_std);
    r.non_negative(*l, "odometry_std", p, sc.localization.odometry_std);
    r.non_negative(*l, "drift_rate", p, sc.localization.drift_rate);
    if (l->contains("dropouts"))
    {
      const json& d = l->at("dropouts");
      if (!d.is_array())
        r.add(p + ".dropouts", "expected array of [t_start, t_end]");
      else
        for (std::size_t i = 0; i < d.size(); ++i)
        {
          if (!d[i].is_array() || d[i].size() != 2 || !d[i][0].is_number() || !d[i][1].is_number() ||
              d[i][0].get<double>() > d[i][1].get<double>())
            r.add(p + ".dropouts[" + std::to_string(i) + "]", "expected [t_start, t_end] with t_start <= t_end");
          else
            sc.localization.dropouts.push_back({d[i][0].get<double>(), d[i][1].get<double>()});
        }
    }
  }
  if (const json* f = r.object(j, "signal_filter", "$"))
  {
    const std::string p = "$.signal_filter";
    r.probability(*f, "p_tp", p, sc.signal_filter.model.p_tp);
    r.probability(*f, "p_fp", p, sc.signal_filter.model.p_fp);
    r.positive(*f, "step", p, sc.signal_filter.transitions.step);
    r.probability(*f, "forward", p, sc.signal_filter.transitions.forward);
    r.probability(*f, "epsilon", p, sc.signal_filter.transitions.epsilon);
    r.number(*f, "threshold", p, sc.signal_filter.threshold, [](double x) { return x > 0.5 && x < 1.0; },
             "must lie in (0.5, 1)");
    if (!(sc.signal_filter.model.p_fp < sc.signal_filter.model.p_tp) || sc.signal_filter.model.p_tp >= 1.0 ||
        sc.signal_filter.model.p_tp <= 0.0)
      r.add(p, "sensor model needs 0 < p_fp < p_tp < 1");
  }
  if (const json* progs = r.object(j, "signal_programs", "$"))
    for (const auto& [id, prog] : progs->items())
    {
      const std::string p = "$.signal_programs." + id;
      sc.signal_programs[id] = read_program(prog, p, r);
      if (sc.map && !sc.map->find_signal(id))
        r.add(p, "signal '" + id + "' does not exist in the map");
    }

  if (const json* s = r.object(j, "sensors", "$"))
  {
    if (const json* c = r.object(*s, "signal_camera", "$.sensors"))
    {
      const std::string p = "$.sensors.signal_camera";
      auto& cam = sc.sensors.signal_camera;
      r.positive(*c, "range", p, cam.range);
      r.probability(*c, "p_tp", p, cam.p_tp);
      r.probability(*c, "p_conf", p, cam.p_conf);
      r.positive(*c, "period", p, cam.period);
    }
    if (const json* o = r.object(*s, "objects", "$.sensors"))
    {
      const std::string p = "$.sensors.objects";
      auto& obj = sc.sensors.objects;
      r.positive(*o, "range", p, obj.range);
      r.positive(*o, "period", p, obj.period);
      r.probability(*o, "p_detect", p, obj.p_detect);
      r.positive(*o, "camera_sigma", p, obj.camera_sigma);
      r.positive(*o, "camera_range_factor", p, obj.camera_range_factor);
      r.positive(*o, "lidar_sigma", p, obj.lidar_sigma);
      r.positive(*o, "radar_sigma", p, obj.radar_sigma);
      r.positive(*o, "radar_velocity_sigma", p, obj.radar_velocity_sigma);
      r.non_negative(*o, "clutter_per_100m", p, obj.clutter_per_100m);
      r.non_negative(*o, "clutter_lateral", p, obj.clutter_lateral);
      r.flag(*o, "camera", p, obj.camera);
      r.flag(*o, "lidar", p, obj.lidar);
      r.flag(*o, "radar", p, obj.radar);
    }
    if (const json* l = r.object(*s, "lidar", "$.sensors"))
    {
      const std::string p = "$.sensors.lidar";
      auto& lid = sc.sensors.lidar;
      r.flag(*l, "enabled", p, lid.enabled);
      r.positive(*l, "range", p, lid.range);
      r.positive(*l, "period", p, lid.period);
      r.non_negative(*l, "mount_height", p, lid.mount_height);
      r.count(*l, "points_per_actor", p, lid.points_per_actor, 1);
      r.non_negative(*l, "noise_sigma", p, lid.noise_sigma);
      r.count(*l, "ground_points", p, lid.ground_points, 0);
      r.non_negative(*l, "vegetation_per_100m", p, lid.vegetation_per_100m);
      r.non_negative(*l, "vegetation_lateral", p, lid.vegetation_lateral);
      r.non_negative(*l, "vegetation_height", p, lid.vegetation_height);
    }
  }
  if (const json* f = r.object(j, "fusion", "$"))
  {
    const std::string p = "$.fusion";
    r.non_negative(*f, "q", p, sc.fusion.q);
    r.positive(*f, "gate", p, sc.fusion.gate);
    r.non_negative(*f, "spawn_exclusion", p, sc.fusion.spawn_exclusion);
    r.count(*f, "m_confirm", p, sc.fusion.management.m_confirm, 1);
    r.count(*f, "k_delete", p, sc.fusion.management.k_delete, 1);
    r.positive(*f, "initial_velocity_var", p, sc.fusion.management.initial_velocity_var);
    r.positive(*f, "prefilter_half_width", p, sc.fusion.prefilter_half_width);
  }
  if (const json* f = r.object(j, "free_space", "$"))
  {
    const std::string p = "$.free_space";
    auto& fs = sc.free_space;
    r.non_negative(*f, "z_min", p, fs.gauge.z_min);
    r.positive(*f, "z_max", p, fs.gauge.z_max);
    r.positive(*f, "lateral_half_width", p, fs.gauge.lateral_half_width);
    r.positive(*f, "eps", p, fs.eps);
    int min_points = static_cast<int>(fs.min_points);
    r.count(*f, "min_points", p, min_points, 1);
    fs.min_points = static_cast<std::size_t>(min_points);
    r.flag(*f, "conservative", p, fs.conservative);
    r.positive(*f, "max_range", p, fs.max_range);
    if (!(fs.gauge.z_min < fs.gauge.z_max))
      r.add(p, "z_min must be below z_max");
  }
  if (const json* o = r.object(j, "obstacle_planner", "$"))
  {
    const std::string p = "$.obstacle_planner";
    r.positive(*o, "collision_half_width", p, sc.zones.collision_half_width);
    r.positive(*o, "warning_half_width", p, sc.zones.warning_half_width);
    r.positive(*o, "special_warning_half_width", p, sc.zones.special_warning_half_width);
    r.non_negative(*o, "stop_offset", p, sc.planner.stop_offset);
    r.non_negative(*o, "bell_distance", p, sc.planner.bell_distance);
    r.non_negative(*o, "grid_margin", p, sc.grid_margin);
    if (sc.zones.warning_half_width < sc.zones.collision_half_width ||
        sc.zones.special_warning_half_width < sc.zones.collision_half_width)
      r.add(p, "warning zones must be at least as wide as the collision zone");
  }
  sc.planner.a_service = sc.vehicle.a_service;

  if (j.contains("actors"))
  {
    if (!j.at("actors").is_array())
      r.add("$.actors", "expected array");
    else
      for (std::size_t i = 0; i < j.at("actors").size(); ++i)
        sc.actors.push_back(read_actor(j.at("actors")[i], "$.actors[" + std::to_string(i) + "]", sc.map.get(), r));
  }

  if (sc.map && sc.initial_s > sc.map->total_length())
    r.add("$.vehicle.initial_s", "beyond the end of the track");
  if (sc.initial_v > sc.vehicle.v_max)
    r.add("$.vehicle.initial_v", "exceeds v_max");

  if (!r.issues.empty())
    throw ValidationError(std::move(r.issues));
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError({path.string() + ": cannot open scenario"});
  json j;
  try
  {
    j = json::parse(in);
  }
  catch (const json::parse_error& e)
  {
    throw ValidationError({path.string() + ": " + e.what()});
  }
  return scenario_from_json(j, path.parent_path());
}

} // namespace tram::sim
