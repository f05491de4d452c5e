#include <gtest/gtest.h>

#include <random>

#include "tram/errors.hpp"
#include "tram/vehicle_control.hpp"

using namespace tram;
using namespace tram::control;

namespace
{

map::InfrastructureElement element(map::ElementKind k, double a, double b, const std::string& id)
{
  map::InfrastructureElement e;
  e.id = id;
  e.kind = k;
  e.s_start = a;
  e.s_end = b;
  return e;
}

struct LoopResult
{
  PlantState final;
  double max_curve_excess = -1e9;
  double max_speed_excess = -1e9;
  std::vector<double> stops;
};

// Closed loop with perfect localisation against a fixed MAL.
LoopResult drive(const map::TrackMap& m, PlantState st, double mal_s, double seconds, ControlConfig cfg = {},
                 double dt = 0.05)
{
  const VehicleParams params;
  Controller ctl(m, params, cfg);
  LoopResult r;
  bool moving = st.v > 0.0;
  for (int k = 0; k < int(seconds / dt); ++k)
  {
    const loc::TrackFix fix{st.s, st.v};
    const auto h = map::digital_horizon(m, st.s, 300.0);
    const auto cmd = ctl.command(fix, {mal_s, MalSource::Signal}, h, dt);
    EXPECT_GE(cmd.accel, -params.a_service - 1e-12);
    EXPECT_LE(cmd.accel, params.a_max + 1e-12);
    st = integrate(st, cmd.accel, dt);
    r.max_curve_excess = std::max(r.max_curve_excess, st.v * st.v - 2 * params.a_service * (mal_s - st.s));
    r.max_speed_excess = std::max(r.max_speed_excess, st.v - active_speed_limit(m, st.s, params, cfg));
    if (moving && st.v == 0.0)
      r.stops.push_back(st.s);
    moving = st.v > 0.0;
  }
  r.final = st;
  return r;
}

} // namespace

TEST(Braking, DistanceExamples)
{
  EXPECT_NEAR(braking_distance(50.0 / 3.6, 1.2), 80.37, 0.01);
  EXPECT_NEAR(braking_distance(40.0 / 3.6, 1.2), 51.44, 0.01);
  EXPECT_DOUBLE_EQ(braking_distance(0.0, 1.2), 0.0);
  EXPECT_THROW(braking_distance(10.0, 0.0), InvalidInput);
  EXPECT_THROW(braking_distance(-1.0, 1.2), InvalidInput);
}

TEST(Arbitrate, MinimumWithTieBreak)
{
  const MovementAuthorityLimit sig{495, MalSource::Signal}, obs{600, MalSource::Obstacle};
  EXPECT_EQ(arbitrate_mal(sig, obs).source, MalSource::Signal);
  EXPECT_EQ(arbitrate_mal(obs, sig).limit_s, 495.0);
  const MovementAuthorityLimit obs_eq{495, MalSource::Obstacle};
  EXPECT_EQ(arbitrate_mal(obs_eq, sig).source, MalSource::Signal);
  EXPECT_EQ(arbitrate_mal(sig, obs_eq).source, MalSource::Signal);
  const MovementAuthorityLimit end{1000, MalSource::TrackEnd};
  EXPECT_EQ(arbitrate_mal(end, end).limit_s, 1000.0);
}

TEST(Arbitrate, SymmetricInLimit)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 100);
  std::uniform_int_distribution<int> src(0, 2);
  for (int i = 0; i < 1000; ++i)
  {
    const MovementAuthorityLimit a{std::round(u(rng)), MalSource(src(rng))};
    const MovementAuthorityLimit b{std::round(u(rng)), MalSource(src(rng))};
    EXPECT_EQ(arbitrate_mal(a, b).limit_s, arbitrate_mal(b, a).limit_s);
  }
}

TEST(OneStep, StillReachesTargetSpeedWithinDistance)
{
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uu(0, 14), ud(0, 200), udt(0.01, 1.0);
  for (int i = 0; i < 5000; ++i)
  {
    const double u = uu(rng), d = ud(rng), dt = udt(rng), a = 1.2;
    const double v = one_step_limit(u, d, a, dt);
    // after travelling v*dt, braking from v still reaches u in the remaining distance
    EXPECT_LE(v * v, u * u + 2 * a * (d - v * dt) + 1e-9);
    EXPECT_LE(v, std::sqrt(u * u + 2 * a * d) + 1e-12);
  }
  EXPECT_DOUBLE_EQ(one_step_limit(0.0, 0.0, 1.2, 0.05), 0.0);
}

TEST(SpeedLimit, ActiveLimitSources)
{
  auto sl = element(map::ElementKind::SpeedLimit, 100, 200, "L");
  sl.attributes = map::SpeedLimitInfo{8.0};
  const map::TrackMap m({{0, 0}, {1000, 0}}, {sl, element(map::ElementKind::RoadCrossing, 600, 610, "X")});
  const VehicleParams p;
  EXPECT_DOUBLE_EQ(active_speed_limit(m, 50, p), p.v_max);
  EXPECT_DOUBLE_EQ(active_speed_limit(m, 150, p), 8.0);
  const auto [z0, z1] = crossing_approach_zone(m.elements()[1], p);
  EXPECT_NEAR(z0, 600 - braking_distance(p.v_max, p.a_service), 1e-9);
  EXPECT_DOUBLE_EQ(z1, 610.0);
  EXPECT_NEAR(active_speed_limit(m, 550, p), 40.0 / 3.6, 1e-12);
  EXPECT_DOUBLE_EQ(active_speed_limit(m, 611, p), p.v_max);
}

TEST(Command, AcceleratesWhenFree)
{
  const map::TrackMap m({{0, 0}, {2000, 0}}, {});
  Controller c(m, VehicleParams{});
  const auto cmd = c.command({100, 5.0}, {2000, MalSource::TrackEnd}, map::digital_horizon(m, 100, 200), 0.05);
  EXPECT_DOUBLE_EQ(cmd.accel, 1.3);
}

TEST(Command, HoldsAtMal)
{
  const map::TrackMap m({{0, 0}, {2000, 0}}, {});
  Controller c(m, VehicleParams{});
  const auto cmd = c.command({500, 0.0}, {500, MalSource::Signal}, map::digital_horizon(m, 500, 200), 0.05);
  EXPECT_DOUBLE_EQ(cmd.accel, 0.0);
}

TEST(Command, BrakesHardWhenMalInsideBrakingDistance)
{
  const map::TrackMap m({{0, 0}, {2000, 0}}, {});
  Controller c(m, VehicleParams{});
  const auto cmd = c.command({100, 10.0}, {130, MalSource::Obstacle}, map::digital_horizon(m, 100, 200), 0.05);
  EXPECT_DOUBLE_EQ(cmd.accel, -1.2);
}

TEST(Command, ClosedLoopStopsJustShortOfMal)
{
  const map::TrackMap m({{0, 0}, {2000, 0}}, {});
  const double mal = 150.0; // 50 m ahead of a 10 m/s vehicle
  const auto r = drive(m, {100, 10.0}, mal, 60.0);
  EXPECT_EQ(r.final.v, 0.0);
  EXPECT_GE(r.final.s, mal - 1.0);
  EXPECT_LE(r.final.s, mal);
  EXPECT_LE(r.max_curve_excess, 0.1);
}

TEST(Command, ClosedLoopFromRestHonoursLimits)
{
  auto sl = element(map::ElementKind::SpeedLimit, 300, 500, "L");
  sl.attributes = map::SpeedLimitInfo{7.0};
  const map::TrackMap m({{0, 0}, {3000, 0}}, {sl, element(map::ElementKind::PedestrianCrossing, 900, 906, "X")});
  const auto r = drive(m, {0, 0}, 1500.0, 200.0);
  EXPECT_LE(r.max_speed_excess, 0.1);
  EXPECT_LE(r.max_curve_excess, 0.1);
  EXPECT_LE(r.final.s, 1500.0);
  EXPECT_GE(r.final.s, 1499.0);
}

TEST(Command, PlatformStopAndDwell)
{
  auto p = element(map::ElementKind::Platform, 280, 310, "P1");
  p.attributes = map::PlatformInfo{300.0};
  const map::TrackMap m({{0, 0}, {2000, 0}}, {p});
  ControlConfig cfg;
  cfg.dwell_time = 5.0;
  const VehicleParams params;
  Controller ctl(m, params, cfg);
  PlantState st{0, 0};
  const double dt = 0.05;
  double stopped_at = -1, stop_t = -1, depart_t = -1;
  for (int k = 0; k < 2000; ++k)
  {
    const double t = k * dt;
    const auto cmd = ctl.command({st.s, st.v}, {2000, MalSource::TrackEnd}, map::digital_horizon(m, st.s, 300), dt);
    const auto next = integrate(st, cmd.accel, dt);
    if (stop_t < 0 && ctl.dwelling() && next.v == 0.0)
    {
      stop_t = t;
      stopped_at = next.s;
    }
    if (stop_t >= 0 && depart_t < 0 && st.v == 0.0 && next.v > 0)
      depart_t = t;
    st = next;
  }
  ASSERT_GE(stop_t, 0.0);
  EXPECT_LE(std::abs(stopped_at - 300.0), 0.25);
  ASSERT_GE(depart_t, 0.0);
  EXPECT_NEAR(depart_t - stop_t, 5.0, 0.11);
  EXPECT_TRUE(ctl.served_platforms().contains("P1"));
  EXPECT_GT(st.s, 400.0);
}

TEST(Command, RestartNeedsMalBeyondHysteresis)
{
  const map::TrackMap m({{0, 0}, {2000, 0}}, {});
  Controller c(m, VehicleParams{});
  const auto h = map::digital_horizon(m, 500, 200);
  EXPECT_DOUBLE_EQ(c.command({500, 0.0}, {501.2, MalSource::Obstacle}, h, 0.05).accel, 0.0);
  EXPECT_GT(c.command({500, 0.0}, {502.0, MalSource::Obstacle}, h, 0.05).accel, 0.0);
}

TEST(Config, Validation)
{
  const map::TrackMap m({{0, 0}, {10, 0}}, {});
  ControlConfig bad;
  bad.mal_decel_ratio = 1.5;
  EXPECT_THROW(Controller(m, VehicleParams{}, bad), InvalidInput);
  VehicleParams vp;
  vp.a_service = 0.0;
  EXPECT_THROW(Controller(m, vp), InvalidInput);
}

TEST(Plant, SemiImplicitEulerNeverReverses)
{
  auto s = integrate({0, 1.0}, -1.2, 1.0);
  EXPECT_DOUBLE_EQ(s.v, 0.0);
  EXPECT_DOUBLE_EQ(s.s, 0.0);
  s = integrate({10, 2.0}, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(s.v, 2.5);
  EXPECT_DOUBLE_EQ(s.s, 11.25);
}
