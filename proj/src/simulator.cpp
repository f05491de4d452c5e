#include "tram/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "tram/errors.hpp"

namespace tram::sim
{

using nlohmann::json;

namespace
{

std::size_t every(double period, double dt)
{
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(period / dt)));
}

/// Time for a vehicle starting at v0 and accelerating at a up to v_max to cover x.
double free_run_time(double x, double v0, double a, double v_max)
{
  if (x <= 0.0)
    return 0.0;
  const double t1 = (v_max - v0) / a;
  const double d1 = 0.5 * (v0 + v_max) * t1;
  if (x <= d1)
    return (-v0 + std::sqrt(v0 * v0 + 2.0 * a * x)) / a;
  return t1 + (x - d1) / v_max;
}

bool allowed_go(const map::SignalInfo& sig, signal::SignalState s)
{
  if (!signal::is_go_state(s))
    return false;
  return sig.allowed_go_states.empty() ? s == signal::SignalState::GoStraight
                                       : std::find(sig.allowed_go_states.begin(), sig.allowed_go_states.end(), s) !=
                                           sig.allowed_go_states.end();
}

signal::SignalState default_go(const map::SignalInfo& sig)
{
  if (!sig.allowed_go_states.empty())
    return sig.allowed_go_states.front();
  return sig.signal_class == signal::SignalClass::Switch ? signal::SignalState::SwitchLockedRight
                                                         : signal::SignalState::GoStraight;
}

std::uint64_t pick_seed(const Scenario& sc, const RunOptions& o)
{
  return o.seed.value_or(sc.seed);
}

Scenario with_overrides(Scenario sc, const RunOptions& o)
{
  if (o.conservative_freespace)
    sc.free_space.conservative = *o.conservative_freespace;
  if (!sc.map)
    throw InvalidInput("scenario has no map");
  return sc;
}

} // namespace

Simulator::Simulator(Scenario scenario, RunOptions options)
  : sc_(with_overrides(std::move(scenario), options)),
    options_(options),
    rng_(pick_seed(sc_, options)),
    log_(options.keep_log),
    localizer_(*sc_.map, sc_.localization, loc::TrackFix{sc_.initial_s, sc_.initial_v}),
    planner_(sc_.vehicle.a_service),
    tracker_(sc_.fusion),
    controller_(*sc_.map, sc_.vehicle, sc_.control),
    plant_{sc_.initial_s, sc_.initial_v}
{
  const auto& map = *sc_.map;
  total_ticks_ = static_cast<std::size_t>(std::ceil(sc_.duration / sc_.dt - 1e-9));

  for (const auto& e : map.elements())
  {
    const auto* sig = e.signal();
    if (!sig)
      continue;
    SignalTrack st{&e, signal::SignalBelief(sig->signal_id, sig->possible_states),
                   signal::transition_matrix(sig->possible_states, sc_.signal_filter.transitions),
                   signal::chamber_set(sig->possible_states)};
    signals_.push_back(std::move(st));

    const auto it = sc_.signal_programs.find(sig->signal_id);
    if (it == sc_.signal_programs.end())
      programs_[sig->signal_id] = SignalProgram{{{default_go(*sig), 0.0}}, false, 0.0, std::nullopt};
    else if (it->second.random)
      programs_[sig->signal_id] = generate_program(*it->second.random, sc_.duration + 60.0, rng_);
    else
      programs_[sig->signal_id] = it->second;
  }

  for (const auto& a : sc_.actors)
  {
    ActorRuntime rt;
    rt.spec = a;
    rt.near_s = map.project(a.waypoints.front().position).s - a.footprint;
    actors_.push_back(std::move(rt));
  }
  poles_ = place_roadside(map, sc_.sensors.objects.clutter_per_100m, sc_.sensors.objects.clutter_lateral, 0.15, 6.0,
                          rng_);
  vegetation_ = place_roadside(map, sc_.sensors.lidar.vegetation_per_100m, sc_.sensors.lidar.vegetation_lateral, 0.4,
                               sc_.sensors.lidar.vegetation_height, rng_);

  mal_ = {map.total_length(), MalSource::TrackEnd};
  emit({{"t", 0.0},
        {"stream", "run_start"},
        {"scenario", sc_.name},
        {"seed", pick_seed(sc_, options_)},
        {"dt", sc_.dt},
        {"duration", sc_.duration},
        {"a_service", sc_.vehicle.a_service},
        {"stop_offset", sc_.planner.stop_offset},
        {"conservative_freespace", sc_.free_space.conservative}});
}

void Simulator::emit(json record)
{
  metrics_.consume(record);
  log_.append(record);
}

void Simulator::event(json record)
{
  record["stream"] = "event";
  emit(std::move(record));
}

loc::Pose2D Simulator::truth_pose() const
{
  const auto pose = sc_.map->point_at(std::clamp(plant_.s, 0.0, sc_.map->total_length()));
  loc::Pose2D p;
  p.x = pose.position.x();
  p.y = pose.position.y();
  p.heading = pose.heading;
  p.speed = plant_.v;
  p.timestamp = t_;
  return p;
}

std::vector<ActorState> Simulator::advance_actors()
{
  std::vector<ActorState> active;
  for (auto& a : actors_)
  {
    if (a.expired)
      continue;
    if (!a.activated_at)
    {
      const bool time_ok = !a.spec.appear_time || t_ >= *a.spec.appear_time;
      const bool dist_ok = !a.spec.appear_distance || a.near_s - plant_.s <= *a.spec.appear_distance;
      if (!(time_ok && dist_ok))
        continue;
      a.activated_at = t_;
      event({{"t", t_}, {"kind", "actor_appeared"}, {"actor", a.spec.id}, {"vehicle_s", plant_.s}});
    }
    const double local = t_ - *a.activated_at;
    if (a.spec.lifetime && local >= *a.spec.lifetime)
    {
      a.expired = true;
      event({{"t", t_}, {"kind", "actor_vanished"}, {"actor", a.spec.id}});
      continue;
    }
    const auto& wps = a.spec.waypoints;
    ActorState st{a.spec.id, a.spec.cls, wps.back().position, Point2d::Zero(), a.spec.footprint, a.spec.height};
    for (std::size_t i = 0; i + 1 < wps.size(); ++i)
    {
      if (local < wps[i + 1].t)
      {
        const double span = wps[i + 1].t - wps[i].t;
        const double u = span > 0.0 ? std::clamp((local - wps[i].t) / span, 0.0, 1.0) : 1.0;
        st.position = wps[i].position + u * (wps[i + 1].position - wps[i].position);
        if (span > 0.0)
          st.velocity = (wps[i + 1].position - wps[i].position) / span;
        break;
      }
    }
    if (local < wps.front().t)
      st.position = wps.front().position;
    active.push_back(std::move(st));
  }
  return active;
}

std::optional<double> Simulator::truth_margin(std::span<const ActorState> actors) const
{
  std::optional<double> best;
  for (const auto& a : actors)
  {
    const auto proj = sc_.map->project(a.position);
    if (std::abs(proj.lateral) > sc_.zones.collision_half_width + a.footprint)
      continue;
    const double gap = proj.s - a.footprint - plant_.s;
    if (gap < -a.footprint - 1.0)
      continue; // already behind the front
    if (!best || gap < *best)
      best = gap;
  }
  return best;
}

bool Simulator::obstacle_ahead_truth(std::span<const ActorState> actors) const
{
  const auto m = truth_margin(actors);
  return m && *m <= sc_.lookahead;
}

bool Simulator::step()
{
  if (halted_ || closed_ || tick_ >= total_ticks_)
    return false;
  const auto& map = *sc_.map;
  const double dt = sc_.dt;

  // 1. world
  const auto actors = advance_actors();
  const loc::Pose2D pose = truth_pose();

  // 2. sensors
  std::map<std::string, std::vector<signal::ChamberDetection>, std::less<>> frames;
  if (tick_ % every(sc_.sensors.signal_camera.period, dt) == 0)
    for (const auto& st : signals_)
    {
      const auto& sig = *st.element->signal();
      const auto truth_state = programs_.at(sig.signal_id).state_at(t_);
      frames[sig.signal_id] = synthesize_chamber_detections(truth_state, st.chambers, st.element->s_start - plant_.s,
                                                            sc_.sensors.signal_camera, rng_);
    }
  const bool object_frame = tick_ % every(sc_.sensors.objects.period, dt) == 0;
  SensorBatches batches;
  if (object_frame && (!actors.empty() || !poles_.empty()))
    batches = synthesize_object_measurements(actors, poles_, pose, sc_.sensors.objects, rng_);
  const bool lidar_frame = sc_.sensors.lidar.enabled && tick_ % every(sc_.sensors.lidar.period, dt) == 0;
  std::vector<freespace::LidarPoint> cloud;
  if (lidar_frame && (!actors.empty() || !poles_.empty() || !vegetation_.empty()))
  {
    std::vector<StaticObject> statics = poles_;
    statics.insert(statics.end(), vegetation_.begin(), vegetation_.end());
    cloud = synthesize_lidar(actors, statics, pose, map, plant_.s, sc_.sensors.lidar, t_, rng_);
  }

  // 3. localisation
  const auto ins = loc::simulate_ins(pose, sc_.localization, rng_);
  const loc::TrackFix fix = localizer_.update(ins, dt);
  // at standstill the GNSS jitter alone trips the monotone filter; only report while moving
  if (localizer_.last_backward_jump() && fix.v > 0.1)
    event({{"t", t_}, {"kind", "anomaly"}, {"what", "backward chainage correction"}, {"s_est", fix.s}});

  // 4. signal handling
  signal::SignalStates states;
  for (auto& st : signals_)
  {
    const auto& sig = *st.element->signal();
    st.belief = signal::predict(st.belief, dt, st.step_matrix, sc_.signal_filter.transitions.step);
    if (const auto it = frames.find(sig.signal_id); it != frames.end() && !it->second.empty())
      st.belief = signal::update(st.belief, signal::plausibility_gate(it->second, sig), sc_.signal_filter.model);
    states[sig.signal_id] = signal::map_state(st.belief, sc_.signal_filter.threshold);
  }
  const auto horizon = map::digital_horizon(map, fix.s, sc_.lookahead);
  const auto sig_result = planner_.plan(fix, horizon, states);
  if (sig_result.fault)
    event({{"t", t_},
           {"kind", "anomaly"},
           {"what", "stop demanded behind vehicle"},
           {"signal_id", sig_result.fault->signal_id}});

  // 5. obstacle handling
  if (object_frame)
  {
    std::array<std::vector<fusion::ObjectMeasurement>, 3> filtered;
    for (std::size_t k = 0; k < batches.size(); ++k)
      filtered[k] = fusion::infrastructure_prefilter(batches[k], map, sc_.fusion.prefilter_half_width);
    tracker_.step(sc_.sensors.objects.period, filtered);
  }
  if (lidar_frame)
  {
    const std::map<std::string, std::vector<freespace::LidarPoint>> clouds{{"lidar", std::move(cloud)}};
    const std::map<std::string, freespace::SensorExtrinsic> extrinsics{
      {"lidar", {0.0, 0.0, sc_.sensors.lidar.mount_height, 0.0}}};
    const auto points = freespace::align_clouds(clouds, extrinsics, [&pose](double) { return pose; });
    polygons_ = freespace::occupied_space(points, map, sc_.free_space, Point2d(pose.x, pose.y));
  }
  const auto confirmed = tracker_.confirmed();
  obstacle::ObstacleDecision od;
  od.mal = {horizon.end_s, MalSource::TrackEnd};
  if (!confirmed.empty() || !polygons_.empty())
  {
    const auto zones = obstacle::build_zones(map, fix.s, sc_.lookahead, sc_.zones);
    od = obstacle::decide(map, fix, confirmed, polygons_, zones, sc_.planner);
  }
  for (const auto& a : od.anomalies)
    event({{"t", t_}, {"kind", "anomaly"}, {"what", a}});

  // 6. arbitration
  MovementAuthorityLimit mal = control::arbitrate_mal(sig_result.mal, od.mal);
  const auto grid = obstacle::grid_separator_adjust(mal, map, sc_.grid_margin, fix.s);
  if (grid.infeasible)
    event({{"t", t_}, {"kind", "anomaly"}, {"what", "infeasible grid separator stop"}, {"limit", mal.limit_s}});
  mal = grid.mal;
  mal_ = mal;

  for (auto& a : actors_)
  {
    if (!a.activated_at || a.expired || a.margin_checked)
      continue;
    const auto it = std::find_if(actors.begin(), actors.end(), [&](const ActorState& s) { return s.id == a.spec.id; });
    if (it == actors.end())
      continue;
    const auto m = truth_margin(std::span<const ActorState>(&*it, 1));
    if (!m || *m < 0.0 || (it->position - Point2d(pose.x, pose.y)).norm() > sc_.sensors.objects.range)
      continue;
    a.margin_checked = true;
    const double needed = control::braking_distance(plant_.v, sc_.vehicle.a_service);
    event({{"t", t_},
           {"kind", "margin_check"},
           {"actor", a.spec.id},
           {"needed", needed},
           {"available", *m},
           {"deficient", needed > *m - sc_.planner.stop_offset}});
  }

  // 7. braking-curve supervision on the true state
  const double curve_excess = plant_.v * plant_.v - 2.0 * sc_.vehicle.a_service * (mal.limit_s - plant_.s);
  if (curve_excess > 0.1)
  {
    event({{"t", t_},
           {"kind", "safety_fault"},
           {"what", "braking curve violated"},
           {"s", plant_.s},
           {"v", plant_.v},
           {"limit", mal.limit_s},
           {"source", to_string(mal.source)}});
    halted_ = true;
  }

  // 8. control
  const auto cmd = halted_ ? control::DriveCommand{-sc_.vehicle.a_service} : controller_.command(fix, mal, horizon, dt);

  // log the tick
  emit({{"t", t_},
        {"stream", "vehicle"},
        {"s", plant_.s},
        {"v", plant_.v},
        {"s_est", fix.s},
        {"v_est", fix.v},
        {"accel", cmd.accel},
        {"mode", fix.mode == loc::FixMode::GnssAided ? "gnss" : "dead_reckoning"},
        {"speed_limit", control::active_speed_limit(map, plant_.s, sc_.vehicle, sc_.control)}});
  emit({{"t", t_},
        {"stream", "mal"},
        {"s", plant_.s},
        {"v", plant_.v},
        {"limit", mal.limit_s},
        {"source", to_string(mal.source)},
        {"signal_limit", sig_result.mal.limit_s},
        {"obstacle_limit", od.mal.limit_s},
        {"grid_adjusted", grid.adjusted}});
  if (!signals_.empty())
  {
    json filtered = json::object();
    json truth = json::object();
    for (const auto& [id, st] : states)
    {
      filtered[id] = st ? json(std::string(signal::to_string(*st))) : json("UNRESOLVED");
      truth[id] = std::string(signal::to_string(programs_.at(id).state_at(t_)));
    }
    emit({{"t", t_}, {"stream", "signals"}, {"states", filtered}, {"truth", truth}});
  }
  const auto margin = truth_margin(actors);
  emit({{"t", t_},
        {"stream", "obstacles"},
        {"bell", od.bell},
        {"nearest", od.nearest_obstacle_s ? json(*od.nearest_obstacle_s) : json(nullptr)},
        {"tracks", confirmed.size()},
        {"polygons", polygons_.size()},
        {"truth_margin", margin ? json(*margin) : json(nullptr)}});

  if (halted_)
  {
    close();
    return false;
  }

  // Protocol commitment on the true aspect: a vehicle that is beyond the
  // commit rule's point of no return while the signal shows an allowed go or
  // GET_READY may legitimately clear the stop point after it turns to stop.
  for (const auto& st : signals_)
  {
    const auto& sig = *st.element->signal();
    const auto state = programs_.at(sig.signal_id).state_at(t_);
    if (allowed_go(sig, state) || state == signal::SignalState::GetReady)
      truth_commit_[sig.signal_id] = signal::commit_rule({plant_.s, plant_.v}, sig.stop_point_s, sig.commit_point_s,
                                                         sc_.vehicle.a_service) == signal::CommitDecision::Proceed;
  }

  // 9. plant
  const double prev_s = plant_.s;
  const double prev_v = plant_.v;
  plant_ = control::integrate(plant_, cmd.accel, dt);
  plant_.s = std::min(plant_.s, map.total_length());
  const double t_next = static_cast<double>(tick_ + 1) * dt;

  for (const auto& st : signals_)
  {
    const auto& sig = *st.element->signal();
    if (prev_s < sig.stop_point_s && plant_.s >= sig.stop_point_s)
    {
      const auto state = programs_.at(sig.signal_id).state_at(t_next);
      const bool stop_aspect =
        signal::demands_stop(state) || (signal::is_go_state(state) && !allowed_go(sig, state));
      const bool committed = truth_commit_[sig.signal_id];
      event({{"t", t_next},
             {"kind", "signal_pass"},
             {"signal_id", sig.signal_id},
             {"state", signal::to_string(state)},
             {"committed", committed},
             {"stop_aspect", stop_aspect},
             {"violation", stop_aspect && !committed}});
    }
  }
  if (controller_.dwelling() && !was_dwelling_)
  {
    const auto* pf = [&]() -> const map::InfrastructureElement* {
      for (const auto& e : map.elements())
        if (e.id == controller_.dwell_platform() && e.platform())
          return &e;
      return nullptr;
    }();
    if (pf)
      event({{"t", t_next},
             {"kind", "platform_stop"},
             {"platform", pf->id},
             {"error", plant_.s - pf->platform()->stop_point_s}});
  }
  was_dwelling_ = controller_.dwelling();
  if (prev_v > 0.0 && plant_.v == 0.0)
  {
    std::string reason = controller_.dwelling() ? "platform" : std::string(to_string(mal.source));
    const bool false_stop = reason == "Obstacle" && !obstacle_ahead_truth(actors);
    stop_positions_.push_back(plant_.s);
    event({{"t", t_next}, {"kind", "stop"}, {"s", plant_.s}, {"reason", reason}, {"false_stop", false_stop}});
  }

  ++tick_;
  t_ = static_cast<double>(tick_) * dt;
  if (tick_ >= total_ticks_)
    close();
  return !closed_;
}

void Simulator::close()
{
  if (closed_)
    return;
  closed_ = true;
  if (!halted_)
    for (const auto& st : signals_)
    {
      const auto& sig = *st.element->signal();
      const auto& prog = programs_.at(sig.signal_id);
      const double a = sc_.vehicle.a_max;
      const double t_stop = free_run_time(sig.stop_point_s - sc_.initial_s, sc_.initial_v, a, sc_.vehicle.v_max);
      const double t_range = free_run_time(st.element->s_start - sc_.sensors.signal_camera.range - sc_.initial_s,
                                           sc_.initial_v, a, sc_.vehicle.v_max);
      if (t_stop + 1.0 > t_ || sig.stop_point_s <= sc_.initial_s)
        continue;
      bool go = true;
      for (double tt = std::max(0.0, t_range - 1.0); tt <= t_stop + 1.0 && go; tt += sc_.dt)
        go = allowed_go(sig, prog.state_at(tt));
      const double window_start = sig.stop_point_s - sc_.sensors.signal_camera.range;
      const bool stopped = std::any_of(stop_positions_.begin(), stop_positions_.end(), [&](double s) {
        return s >= window_start && s <= sig.stop_point_s;
      });
      event({{"t", t_},
             {"kind", "signal_encounter"},
             {"signal_id", sig.signal_id},
             {"go_encounter", go},
             {"stopped", stopped}});
    }
  emit({{"t", t_}, {"stream", "run_end"}, {"status", halted_ ? "safety_fault" : "ok"}, {"ticks", tick_}});
}

RunResult Simulator::run()
{
  while (step())
  {
  }
  close();
  RunResult result;
  result.status = halted_ ? RunStatus::SafetyFault : RunStatus::Ok;
  result.metrics = metrics_.report();
  result.log = std::move(log_);
  return result;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options)
{
  Simulator sim(scenario, options);
  return sim.run();
}

} // namespace tram::sim
