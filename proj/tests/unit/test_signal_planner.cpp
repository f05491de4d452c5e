#include <gtest/gtest.h>

#include <random>

#include "tram/errors.hpp"
#include "tram/signal_planner.hpp"

using namespace tram;
using namespace tram::signal;
using loc::TrackFix;

namespace
{

map::InfrastructureElement make_signal(const std::string& id, double s, double stop, double commit)
{
  map::InfrastructureElement e;
  e.id = id;
  e.kind = map::ElementKind::Signal;
  e.s_start = e.s_end = s;
  map::SignalInfo info;
  info.signal_id = id;
  info.allowed_go_states = {SignalState::GoStraight};
  info.stop_point_s = stop;
  info.commit_point_s = commit;
  e.attributes = info;
  return e;
}

map::TrackMap two_signal_map()
{
  return map::TrackMap({{0, 0}, {2000, 0}},
                       {make_signal("S1", 500, 495, 485), make_signal("S2", 900, 895, 885)});
}

TrackFix at(double s, double v = 0.0)
{
  return TrackFix{s, v};
}

} // namespace

TEST(CommitRule, BrakingReachBeyondStopPointProceeds)
{
  // 13.89 m/s needs 80.37 m at 1.2 m/s^2; stop point 70 m ahead
  EXPECT_EQ(commit_rule(at(100, 13.89), 170, 160, 1.2), CommitDecision::Proceed);
  EXPECT_EQ(commit_rule(at(100, 13.89), 190, 120, 1.2), CommitDecision::StopAtSignal);
}

TEST(CommitRule, StandstillBeforeCommitStops)
{
  EXPECT_EQ(commit_rule(at(50, 0.0), 100, 90, 1.2), CommitDecision::StopAtSignal);
  EXPECT_EQ(commit_rule(at(90, 0.0), 100, 90, 1.2), CommitDecision::StopAtSignal); // on the point itself
}

TEST(CommitRule, PastCommitPointProceeds)
{
  EXPECT_EQ(commit_rule(at(91, 0.2), 100, 90, 1.2), CommitDecision::Proceed);
  EXPECT_THROW(commit_rule(at(0, 1), 100, 90, 0.0), InvalidInput);
}

TEST(CommitRule, ProceedMonotoneInSpeed)
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> us(0, 200), uv(0, 16);
  for (int i = 0; i < 5000; ++i)
  {
    const double s = us(rng), v = uv(rng), v2 = v + uv(rng);
    if (commit_rule(at(s, v), 150, 140, 1.2) == CommitDecision::Proceed)
      EXPECT_EQ(commit_rule(at(s, v2), 150, 140, 1.2), CommitDecision::Proceed);
  }
}

TEST(DefaultStopCommit, ArithmeticAndClamp)
{
  const auto d = default_stop_and_commit(500.0);
  EXPECT_DOUBLE_EQ(d.stop_point_s, 495.0);
  EXPECT_DOUBLE_EQ(d.commit_point_s, 485.0);
  EXPECT_FALSE(d.clamped);
  const auto c = default_stop_and_commit(3.0);
  EXPECT_DOUBLE_EQ(c.stop_point_s, 0.0);
  EXPECT_DOUBLE_EQ(c.commit_point_s, 0.0);
  EXPECT_TRUE(c.clamped);
  const auto k = default_stop_and_commit(500.0, {8.0, 20.0});
  EXPECT_DOUBLE_EQ(k.stop_point_s, 492.0);
  EXPECT_DOUBLE_EQ(k.commit_point_s, 472.0);
}

TEST(SignalMal, StopHoldsAtStopPoint)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  const auto h = map::digital_horizon(m, 300, 300);
  const auto r = signal_mal(at(300, 10), h, {{"S1", SignalState::Stop}}, 1.2);
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 495.0);
  EXPECT_EQ(r.mal.source, MalSource::Signal);
  EXPECT_FALSE(r.fault);
}

TEST(SignalMal, AllowedGoOpensToHorizonEnd)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  const auto h = map::digital_horizon(m, 300, 300);
  const auto r = signal_mal(at(300, 10), h, {{"S1", SignalState::GoStraight}}, 1.2);
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 600.0);
  EXPECT_EQ(r.mal.source, MalSource::TrackEnd);
}

TEST(SignalMal, NoSignalsMeansHorizonEnd)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {});
  const auto r = signal_mal(at(100), map::digital_horizon(m, 100, 200), {}, 1.2);
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 300.0);
}

TEST(SignalMal, WrongRouteGoIsStopDemand)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  const auto r = signal_mal(at(300), map::digital_horizon(m, 300, 300), {{"S1", SignalState::GoLeft}}, 1.2);
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 495.0);
}

TEST(SignalMal, UnresolvedAndMissingAreStops)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  const auto h = map::digital_horizon(m, 300, 300);
  EXPECT_DOUBLE_EQ(signal_mal(at(300), h, {{"S1", std::nullopt}}, 1.2).mal.limit_s, 495.0);
  EXPECT_DOUBLE_EQ(signal_mal(at(300), h, {}, 1.2).mal.limit_s, 495.0);
}

TEST(SignalMal, GetReadyUsesCommitRule)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  const SignalStates gr{{"S1", SignalState::GetReady}};
  // far and slow: stop
  EXPECT_DOUBLE_EQ(signal_mal(at(400, 5), map::digital_horizon(m, 400, 200), gr, 1.2).mal.limit_s, 495.0);
  // past the commit point: proceed
  EXPECT_DOUBLE_EQ(signal_mal(at(486, 2), map::digital_horizon(m, 486, 200), gr, 1.2).mal.limit_s, 686.0);
  // held vehicle past commit point but able to stop: stop
  EXPECT_DOUBLE_EQ(signal_mal(at(486, 2), map::digital_horizon(m, 486, 200), gr, 1.2, {}, {"S1"}).mal.limit_s, 495.0);
}

TEST(SignalMal, FirstStopDemandWins)
{
  const auto m = two_signal_map();
  const auto h = map::digital_horizon(m, 300, 700);
  const auto r = signal_mal(at(300), h, {{"S1", SignalState::GoStraight}, {"S2", SignalState::Stop}}, 1.2);
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 895.0);
  ASSERT_EQ(r.decisions.size(), 2u);
  EXPECT_EQ(r.decisions[0].signal_id, "S1");
}

TEST(SignalMal, PassedStopPointRaisesFault)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  const auto r = signal_mal(at(497, 1.0), map::digital_horizon(m, 497, 100), {{"S1", SignalState::Stop}}, 1.2);
  ASSERT_TRUE(r.fault);
  EXPECT_EQ(r.fault->signal_id, "S1");
  EXPECT_GE(r.mal.limit_s, 497.0);
}

TEST(SignalPlanner, PassiveSafetyWithoutGoStates)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> us(0, 495), uv(0, 14);
  std::uniform_int_distribution<int> pick(0, 3);
  const std::array<ResolvedState, 4> non_go{SignalState::Stop, SignalState::StopRegistered, std::nullopt,
                                            SignalState::GoRight};
  SignalPlanner planner(1.2);
  for (int i = 0; i < 20000; ++i)
  {
    const TrackFix v = at(us(rng), uv(rng));
    const auto r = planner.plan(v, map::digital_horizon(m, v.s, 600), {{"S1", non_go[pick(rng)]}});
    ASSERT_LE(r.mal.limit_s, 495.0);
  }
}

TEST(SignalPlanner, LatchHoldsOnlyWhileUnstoppable)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  SignalPlanner planner(1.2);
  // authorised by GO at speed
  auto r = planner.plan(at(420, 13), map::digital_horizon(m, 420, 200), {{"S1", SignalState::GoStraight}});
  EXPECT_GT(r.mal.limit_s, 495.0);
  // signal flips to STOP while the stop point is out of braking reach: latched through
  r = planner.plan(at(430, 13), map::digital_horizon(m, 430, 200), {{"S1", SignalState::Stop}});
  EXPECT_GT(r.mal.limit_s, 495.0);
  ASSERT_FALSE(r.decisions.empty());
  EXPECT_TRUE(r.decisions[0].latched);

  // a fresh planner that could still stop obeys the STOP
  SignalPlanner slow(1.2);
  slow.plan(at(300, 5), map::digital_horizon(m, 300, 300), {{"S1", SignalState::GoStraight}});
  r = slow.plan(at(301, 5), map::digital_horizon(m, 301, 300), {{"S1", SignalState::Stop}});
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 495.0);
}

TEST(SignalPlanner, HeldSignalNeedsGoAfterStandstillPastCommit)
{
  const map::TrackMap m({{0, 0}, {1000, 0}}, {make_signal("S1", 500, 495, 485)});
  SignalPlanner planner(1.2);
  auto r = planner.plan(at(490, 0.0), map::digital_horizon(m, 490, 200), {{"S1", SignalState::Stop}});
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 495.0);
  r = planner.plan(at(490, 0.0), map::digital_horizon(m, 490, 200), {{"S1", SignalState::GetReady}});
  EXPECT_DOUBLE_EQ(r.mal.limit_s, 495.0);
  r = planner.plan(at(490, 0.0), map::digital_horizon(m, 490, 200), {{"S1", SignalState::GoStraight}});
  EXPECT_GT(r.mal.limit_s, 495.0);
}
