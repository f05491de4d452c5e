#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tram/errors.hpp"
#include "tram/free_space.hpp"

using namespace tram;
using namespace tram::freespace;

namespace
{

map::TrackMap straight_map()
{
  return map::TrackMap({{-10, 0}, {200, 0}}, {});
}

loc::Pose2D pose(double x, double y, double heading, double t = 0.0, double speed = 0.0)
{
  loc::Pose2D p;
  p.x = x;
  p.y = y;
  p.heading = heading;
  p.timestamp = t;
  p.speed = speed;
  return p;
}

} // namespace

TEST(Align, IdentityAtOrigin)
{
  const std::map<std::string, std::vector<LidarPoint>> clouds{{"front", {{1, 2, 3, 0}, {-4, 5, 0.5, 0}}}};
  const std::map<std::string, SensorExtrinsic> ext{{"front", {}}};
  const auto out = align_clouds(clouds, ext, [](double) { return pose(0, 0, 0); });
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].isApprox(Eigen::Vector3d(1, 2, 3)));
  EXPECT_TRUE(out[1].isApprox(Eigen::Vector3d(-4, 5, 0.5)));
}

TEST(Align, Translation)
{
  const std::map<std::string, std::vector<LidarPoint>> clouds{{"front", {{10, 0, 1, 0}}}};
  const std::map<std::string, SensorExtrinsic> ext{{"front", {}}};
  const auto out = align_clouds(clouds, ext, [](double) { return pose(100, 0, 0); });
  EXPECT_TRUE(out[0].isApprox(Eigen::Vector3d(110, 0, 1)));
}

TEST(Align, ExtrinsicAndHeadingCompose)
{
  // sensor 2 m forward, yawed 90 deg left; vehicle heading 90 deg
  const std::map<std::string, std::vector<LidarPoint>> clouds{{"s", {{1, 0, 0, 0}}}};
  const std::map<std::string, SensorExtrinsic> ext{{"s", {2, 0, 1.5, std::numbers::pi / 2}}};
  const auto out = align_clouds(clouds, ext, [](double) { return pose(5, 5, std::numbers::pi / 2); });
  // vehicle frame point (2, 1) -> map (5 - 1, 5 + 2)
  EXPECT_NEAR(out[0].x(), 4.0, 1e-12);
  EXPECT_NEAR(out[0].y(), 7.0, 1e-12);
  EXPECT_NEAR(out[0].z(), 1.5, 1e-12);
}

TEST(Align, MovingVehicleInterpolatedPerPoint)
{
  const std::vector<loc::Pose2D> hist{pose(0, 0, 0, 0.0, 10), pose(10, 0, 0, 1.0, 10)};
  const std::map<std::string, std::vector<LidarPoint>> clouds{{"s", {{5, 0, 1, 0.30}, {5, 0, 1, 0.40}}}};
  const std::map<std::string, SensorExtrinsic> ext{{"s", {}}};
  const auto out = align_clouds(clouds, ext, [&](double t) { return interpolate_pose(hist, t); });
  EXPECT_NEAR(out[1].x() - out[0].x(), 1.0, 1e-12);
}

TEST(Align, MissingExtrinsicIsConfigError)
{
  const std::map<std::string, std::vector<LidarPoint>> clouds{{"rear", {{1, 0, 1, 0}}}};
  EXPECT_THROW(align_clouds(clouds, {}, [](double) { return pose(0, 0, 0); }), ConfigError);
}

TEST(InterpolatePose, HeadingTakesShortWay)
{
  const std::vector<loc::Pose2D> hist{pose(0, 0, 3.0, 0.0), pose(0, 0, -3.0, 1.0)};
  const auto mid = interpolate_pose(hist, 0.5);
  EXPECT_NEAR(std::abs(mid.heading), std::numbers::pi, 1e-9);
  EXPECT_EQ(interpolate_pose(hist, -5).timestamp, 0.0);
  EXPECT_EQ(interpolate_pose(hist, 5).timestamp, 1.0);
}

TEST(Gauge, HeightBandAndLateralWidth)
{
  const auto m = straight_map();
  const std::vector<Eigen::Vector3d> pts{{50, 0, 0.1}, {50, 0, 4.0}, {50, 0.5, 1.0}, {50, 1.6, 1.0}, {50, -1.5, 3.8}};
  const auto out = gauge_filter(pts, ClearanceGauge{}, m);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].isApprox(pts[2]));
  EXPECT_TRUE(out[1].isApprox(pts[4]));
  EXPECT_THROW(gauge_filter(pts, ClearanceGauge{2.0, 1.0, 1.5}, m), InvalidInput);
}

TEST(Cluster, EmptyAndSeparatedGroups)
{
  EXPECT_TRUE(cluster(std::vector<Point2d>{}, 0.5, 1).empty());
  std::vector<Point2d> pts;
  for (int i = 0; i < 5; ++i)
  {
    pts.emplace_back(0.1 * i, 0);
    pts.emplace_back(5.0 + 0.1 * i, 0);
  }
  const auto c = cluster(pts, 0.5, 3);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], (std::vector<std::size_t>{0, 2, 4, 6, 8}));
  EXPECT_THROW(cluster(pts, 0.0, 1), InvalidInput);
}

TEST(Cluster, MatchesUnionFindOracle)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  std::uniform_int_distribution<int> n(0, 150);
  for (int trial = 0; trial < 100; ++trial)
  {
    std::vector<Point2d> pts;
    for (int i = n(rng); i > 0; --i)
      pts.emplace_back(u(rng), u(rng));
    const double eps = 0.3 + 0.05 * (trial % 10);
    const std::size_t min_points = 1 + trial % 4;
    EXPECT_EQ(cluster(pts, eps, min_points), oracle::union_find_clusters(pts, eps, min_points));
  }
}

TEST(Hull, UnitSquare)
{
  const std::vector<Point2d> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const auto h = hull(sq, 0.5);
  EXPECT_NEAR(area(h.vertices), 1.0, 1e-12);
  EXPECT_GT(signed_area(h.vertices), 0.0);
  EXPECT_EQ(h.source_point_count, 5u);
  EXPECT_FALSE(h.is_shadow);
}

TEST(Hull, SinglePointInflated)
{
  const std::vector<Point2d> one{{3, 4}};
  const auto h = hull(one, 0.5);
  EXPECT_NEAR(area(h.vertices), 0.25 * 0.25, 1e-12);
  EXPECT_TRUE(point_in_polygon(Point2d(3, 4), h.vertices, 0.0));
}

TEST(Hull, CollinearPairInflated)
{
  const std::vector<Point2d> two{{0, 0}, {1, 0}};
  const auto h = hull(two, 0.5);
  EXPECT_GT(area(h.vertices), 0.0);
  for (const auto& p : two)
    EXPECT_TRUE(point_in_polygon(p, h.vertices, 0.0));
}

TEST(Hull, RandomPointsContained)
{
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 50; ++trial)
  {
    std::vector<Point2d> pts;
    for (int i = 0; i < 100; ++i)
      pts.emplace_back(n(rng), n(rng));
    const auto h = hull(pts, 0.5);
    for (const auto& p : pts)
      EXPECT_TRUE(point_in_polygon(p, h.vertices, 1e-9));
  }
}

TEST(Shadows, NoPolygonsNoShadows)
{
  EXPECT_TRUE(occlusion_shadows({}, Point2d(0, 0), 20.0).empty());
}

TEST(Shadows, SquareAheadCastsRadialQuad)
{
  std::vector<OccupiedPolygon> polys{{tram::square_around<double>(Point2d(10.5, 0), 1.0), 4, false}};
  const Point2d origin(0, 0);
  const auto sh = occlusion_shadows(polys, origin, 20.0);
  ASSERT_EQ(sh.size(), 1u);
  const auto& v = sh[0].vertices;
  ASSERT_EQ(v.size(), 4u);
  EXPECT_TRUE(sh[0].is_shadow);
  // near vertices are the silhouette corners (10, +-0.5)
  EXPECT_NEAR(v[0].x(), 10.0, 1e-12);
  EXPECT_NEAR(std::abs(v[0].y()), 0.5, 1e-12);
  EXPECT_NEAR(v[3].x(), 10.0, 1e-12);
  // far vertices on the same rays at max_range
  for (auto [near, far] : {std::pair{0, 1}, std::pair{3, 2}})
  {
    EXPECT_NEAR(v[far].norm(), 20.0, 1e-9);
    EXPECT_NEAR(cross2<double>(v[near], v[far]), 0.0, 1e-9);
    EXPECT_GT(v[near].dot(v[far]), 0.0);
    EXPECT_NEAR(v[far].norm() - v[near].norm(), 10.0, 0.02); // radial depth
  }
  // ray-casting oracle: every ray from the sensor that hits the square continues into the shadow
  for (double y = -0.45; y <= 0.45; y += 0.05)
  {
    const Point2d dir = Point2d(10.0, y).normalized();
    EXPECT_TRUE(point_in_polygon<double>(dir * 15.0, v, 1e-9));
    EXPECT_TRUE(point_in_polygon<double>(dir * 19.9, v, 1e-9));
  }
  EXPECT_FALSE(point_in_polygon<double>(Point2d(15, 2), v));
  EXPECT_FALSE(point_in_polygon<double>(Point2d(5, 0), v));
}

TEST(Shadows, ModeOffLeavesOutputUnchanged)
{
  const auto m = straight_map();
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 10; ++i)
    pts.emplace_back(30 + 0.1 * i, 0.2, 1.0);
  FreeSpaceConfig cfg;
  const auto off = occupied_space(pts, m, cfg, Point2d(0, 0));
  ASSERT_EQ(off.size(), 1u);
  EXPECT_FALSE(off[0].is_shadow);
  cfg.conservative = true;
  const auto on = occupied_space(pts, m, cfg, Point2d(0, 0));
  ASSERT_EQ(on.size(), 2u);
  EXPECT_EQ(on[0].vertices, off[0].vertices);
  EXPECT_TRUE(on[1].is_shadow);
}

TEST(OccupiedSpace, ContainmentAndMonotonicity)
{
  const auto m = straight_map();
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> ux(0, 60), uy(-2.5, 2.5), uz(0, 4.5);
  FreeSpaceConfig cfg;
  cfg.min_points = 1; // every gauge-passing point must then be covered
  for (int trial = 0; trial < 40; ++trial)
  {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 120; ++i)
      pts.emplace_back(ux(rng), uy(rng), uz(rng));
    const auto polys = occupied_space(pts, m, cfg, Point2d(0, 0));
    for (const auto& p : gauge_filter(pts, cfg.gauge, m))
    {
      const bool inside = std::any_of(polys.begin(), polys.end(), [&](const OccupiedPolygon& poly) {
        return point_in_polygon<double>(p.head<2>(), poly.vertices, 1e-9);
      });
      EXPECT_TRUE(inside);
    }
    // adding points never shrinks the union area
    auto more = pts;
    for (int i = 0; i < 40; ++i)
      more.emplace_back(ux(rng), uy(rng), uz(rng));
    const auto grown = occupied_space(more, m, cfg, Point2d(0, 0));
    const double a0 = oracle::union_area_grid(polys, -1, -3, 61, 3, 0.05);
    const double a1 = oracle::union_area_grid(grown, -1, -3, 61, 3, 0.05);
    EXPECT_GE(a1, a0);
  }
}
