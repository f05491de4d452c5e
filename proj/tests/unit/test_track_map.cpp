#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tram/errors.hpp"
#include "tram/track_map.hpp"

using namespace tram;
using namespace tram::map;

namespace
{

std::vector<Point2d> straight(double length, double step = 10.0)
{
  std::vector<Point2d> pts;
  for (double x = 0; x <= length + 1e-9; x += step)
    pts.emplace_back(x, 0.0);
  return pts;
}

InfrastructureElement signal_at(double s, const std::string& id = "S1")
{
  InfrastructureElement e;
  e.id = id;
  e.kind = ElementKind::Signal;
  e.s_start = e.s_end = s;
  map::SignalInfo info;
  info.signal_id = id;
  info.allowed_go_states = {signal::SignalState::GoStraight};
  info.stop_point_s = s - 5.0;
  info.commit_point_s = s - 15.0;
  e.attributes = info;
  return e;
}

InfrastructureElement span(ElementKind k, double a, double b, const std::string& id)
{
  InfrastructureElement e;
  e.id = id;
  e.kind = k;
  e.s_start = a;
  e.s_end = b;
  if (k == ElementKind::SpeedLimit)
    e.attributes = SpeedLimitInfo{8.0};
  if (k == ElementKind::Platform)
    e.attributes = PlatformInfo{b - 2.0};
  return e;
}

std::vector<Point2d> arc(double radius, std::size_t n, double sweep)
{
  std::vector<Point2d> pts;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double a = sweep * double(i) / double(n - 1);
    pts.emplace_back(radius * std::sin(a), radius * (1.0 - std::cos(a)));
  }
  return pts;
}

} // namespace

TEST(Simplify, CollinearReducesToEndpoints)
{
  const std::vector<Point2d> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
  const auto out = simplify_polyline(pts, 0.1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.front(), pts.front());
  EXPECT_EQ(out.back(), pts.back());
}

TEST(Simplify, TwoPointsIdentity)
{
  const std::vector<Point2d> pts{{0, 0}, {7, 3}};
  EXPECT_EQ(simplify_polyline(pts, 5.0), pts);
}

TEST(Simplify, RejectsTooFewPointsAndBadTolerance)
{
  const std::vector<Point2d> one{{0, 0}};
  EXPECT_THROW(simplify_polyline(one, 0.1), InvalidInput);
  const std::vector<Point2d> two{{0, 0}, {1, 0}};
  EXPECT_THROW(simplify_polyline(two, 0.0), InvalidInput);
}

TEST(Simplify, ArcWithinToleranceExhaustive)
{
  const auto pts = arc(200.0, 100, 1.2);
  const auto out = simplify_polyline(pts, 0.05);
  EXPECT_LT(out.size(), pts.size());
  EXPECT_TRUE(oracle::is_subsequence(out, pts));
  EXPECT_LE(oracle::max_deviation(pts, out), 0.05);
}

TEST(Simplify, RandomTracksNeverExceedTolerance)
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> tol(0.01, 2.0);
  for (int trial = 0; trial < 50; ++trial)
  {
    const auto pts = oracle::random_track(rng, 200, 5.0, 0.05);
    const double t = tol(rng);
    const auto out = simplify_polyline(pts, t);
    EXPECT_LE(out.size(), pts.size());
    EXPECT_EQ(out.front(), pts.front());
    EXPECT_EQ(out.back(), pts.back());
    EXPECT_TRUE(oracle::is_subsequence(out, pts));
    EXPECT_LE(oracle::max_deviation(pts, out), t + 1e-12);
  }
}

TEST(BuildMap, StraightTrackKeepsSignal)
{
  const auto pts = straight(1000.0);
  const auto m = build_map(pts, 0.1, {signal_at(500.0)});
  EXPECT_NEAR(m.total_length(), 1000.0, 1e-9);
  EXPECT_EQ(m.points().size(), 2u);
  ASSERT_EQ(m.elements().size(), 1u);
  EXPECT_NE(m.find_signal("S1"), nullptr);
  EXPECT_EQ(m.find_signal("nope"), nullptr);
}

TEST(BuildMap, EmptyElementsGiveEmptyHorizons)
{
  const auto m = build_map(straight(300.0), 0.1, {});
  for (double s = 0; s < 300; s += 17)
    EXPECT_TRUE(digital_horizon(m, s, 200).events.empty());
}

TEST(BuildMap, DuplicatePointsDropped)
{
  const std::vector<Point2d> pts{{0, 0}, {0, 0}, {10, 0}, {10, 0}, {10, 10}, {10, 10}};
  const auto m = build_map(pts, 0.01, {});
  const auto& ch = m.chainage();
  for (std::size_t i = 0; i + 1 < ch.size(); ++i)
  {
    EXPECT_GT(ch[i + 1], ch[i]);
    EXPECT_NEAR(ch[i + 1] - ch[i], (m.points()[i + 1] - m.points()[i]).norm(), 1e-9);
  }
  EXPECT_NEAR(m.total_length(), 20.0, 1e-12);
}

TEST(BuildMap, ElementOutsideTrackNamesElement)
{
  try
  {
    build_map(straight(100.0), 0.1, {signal_at(150.0, "far_signal")});
    FAIL() << "expected InvalidMap";
  }
  catch (const InvalidMap& e)
  {
    EXPECT_NE(std::string(e.what()).find("far_signal"), std::string::npos);
  }
}

TEST(BuildMap, SignalStopPointMustPrecedeSignal)
{
  auto e = signal_at(50.0);
  std::get<map::SignalInfo>(e.attributes).stop_point_s = 55.0;
  EXPECT_THROW(build_map(straight(100.0), 0.1, {e}), InvalidMap);
}

TEST(TrackMap, TooFewDistinctPoints)
{
  EXPECT_THROW(TrackMap({{1, 1}, {1, 1}}, {}), InvalidInput);
}

TEST(PointAt, EndpointsAndInterpolation)
{
  const TrackMap m({{0, 0}, {100, 0}, {100, 50}}, {});
  EXPECT_EQ(m.point_at(0).position, Point2d(0, 0));
  EXPECT_EQ(m.point_at(150).position, Point2d(100, 50));
  const auto p = m.point_at(12.5);
  EXPECT_NEAR(p.position.x(), 12.5, 1e-12);
  EXPECT_NEAR(p.position.y(), 0.0, 1e-12);
  EXPECT_NEAR(p.heading, 0.0, 1e-12);
  EXPECT_NEAR(m.point_at(120).heading, std::numbers::pi / 2, 1e-12);
  EXPECT_THROW(m.point_at(-0.1), RangeError);
  EXPECT_THROW(m.point_at(150.1), RangeError);
}

TEST(PointAt, ProjectionRecoversChainage)
{
  const auto m = build_map(straight(500.0), 0.1, {});
  for (double s = 0; s <= 500; s += 3.7)
    EXPECT_NEAR(m.project(m.point_at(s).position).s, s, 1e-6);
}

TEST(Horizon, SignalAheadAtChainageDifference)
{
  const auto m = build_map(straight(1000.0), 0.1, {signal_at(500.0)});
  const auto h = digital_horizon(m, 400.0, 200.0);
  ASSERT_EQ(h.events.size(), 1u);
  EXPECT_DOUBLE_EQ(h.events[0].distance_ahead, 100.0);
  EXPECT_DOUBLE_EQ(h.end_s, 600.0);
}

TEST(Horizon, PastAllElementsIsEmpty)
{
  const auto m = build_map(straight(1000.0), 0.1, {signal_at(500.0)});
  EXPECT_TRUE(digital_horizon(m, 600.0, 200.0).events.empty());
}

TEST(Horizon, SpanningElementHasZeroDistance)
{
  const auto m = build_map(straight(1000.0), 0.1, {span(ElementKind::PedestrianCrossing, 390, 410, "X")});
  const auto h = digital_horizon(m, 400.0, 50.0);
  ASSERT_EQ(h.events.size(), 1u);
  EXPECT_DOUBLE_EQ(h.events[0].distance_ahead, 0.0);
}

TEST(Horizon, TruncatedAtTrackEnd)
{
  const auto m = build_map(straight(100.0), 0.1, {signal_at(95.0)});
  const auto h = digital_horizon(m, 90.0, 200.0);
  EXPECT_DOUBLE_EQ(h.end_s, 100.0);
  EXPECT_EQ(h.events.size(), 1u);
  EXPECT_THROW(digital_horizon(m, 101.0, 10.0), RangeError);
  EXPECT_THROW(digital_horizon(m, 10.0, 0.0), InvalidInput);
}

TEST(Horizon, MatchesBruteForceScan)
{
  std::mt19937_64 rng(23);
  const auto pts = oracle::random_track(rng, 300, 5.0, 0.02);
  const auto base = build_map(pts, 0.05, {});
  const double len = base.total_length();
  std::uniform_real_distribution<double> us(0, len);
  std::uniform_real_distribution<double> ul(0, 60);
  std::vector<InfrastructureElement> el;
  for (int i = 0; i < 40; ++i)
  {
    const double a = us(rng);
    const double b = std::min(len, a + (i % 3 == 0 ? 0.0 : ul(rng)));
    el.push_back(span(i % 2 ? ElementKind::GridSeparator : ElementKind::RoadCrossing, a, b, "e" + std::to_string(i)));
  }
  const TrackMap m(base.points(), el);
  std::uniform_real_distribution<double> look(1, 400);
  for (int q = 0; q < 200; ++q)
  {
    const double s = us(rng);
    const double L = look(rng);
    const auto h = digital_horizon(m, s, L);
    auto expect = oracle::horizon_scan(m, s, L);
    std::vector<std::pair<double, std::size_t>> got;
    for (const auto& e : h.events)
    {
      got.emplace_back(e.distance_ahead, e.element_index);
      EXPECT_GE(e.distance_ahead, 0.0);
      EXPECT_LE(e.distance_ahead, L);
    }
    for (std::size_t i = 1; i < got.size(); ++i)
      EXPECT_LE(got[i - 1].first, got[i].first);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, expect);
  }
}

TEST(Corridor, StraightRectangle)
{
  const auto m = build_map(straight(500.0), 0.1, {});
  const auto poly = clearance_corridor(m, 100.0, 200.0, 1.5);
  EXPECT_NEAR(area(poly), 300.0, 1e-6);
  EXPECT_GT(signed_area(poly), 0.0);
  EXPECT_NEAR(area(clearance_corridor(m, 100.0, 200.0, 0.001)), 0.2, 1e-6);
}

TEST(Corridor, DegenerateSpanRejected)
{
  const auto m = build_map(straight(500.0), 0.1, {});
  EXPECT_THROW(clearance_corridor(m, 100.0, 100.5, 1.5), InvalidInput);
  EXPECT_THROW(clearance_corridor(m, 100.0, 200.0, 0.0), InvalidInput);
}

TEST(Corridor, CurvedTrackContainsCentrelineAndOffsetsWithinOnePercent)
{
  const TrackMap m(simplify_polyline(arc(60.0, 200, 2.0), 0.01), {});
  const double hw = 1.5;
  const auto poly = clearance_corridor(m, 10.0, 100.0, hw);
  for (double s : corridor_samples(m, 10.0, 100.0))
    EXPECT_TRUE(point_in_polygon(m.point_at(s).position, poly));
  // every vertex sits hw from the centreline, within 1%
  for (const auto& v : poly)
  {
    const double d = m.project(v).distance;
    EXPECT_NEAR(d, hw, 0.01 * hw);
  }
  // ring is simple: no two non-adjacent edges cross
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j)
    {
      if (i == 0 && j == n - 1)
        continue;
      EXPECT_FALSE(segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        << "edges " << i << " and " << j;
    }
}
