#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace tram
{

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Polygon = std::vector<Vec2<Scalar>>;

using Point2d = Vec2<double>;
using Polygon2d = Polygon<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a)
{
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi_v<Scalar>)
    a += two_pi;
  else if (a > std::numbers::pi_v<Scalar>)
    a -= two_pi;
  return a;
}

template <typename Scalar>
Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b)
{
  return a.x() * b.y() - a.y() * b.x();
}

/// Closest-point parameter of p on segment [a, b], clamped to [0, 1].
template <typename Scalar>
Scalar segment_parameter(const Vec2<Scalar>& p, const Vec2<Scalar>& a, const Vec2<Scalar>& b)
{
  const Vec2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 <= Scalar(0))
    return Scalar(0);
  return std::clamp((p - a).dot(ab) / len2, Scalar(0), Scalar(1));
}

template <typename Scalar>
Scalar point_segment_distance(const Vec2<Scalar>& p, const Vec2<Scalar>& a, const Vec2<Scalar>& b)
{
  const Scalar t = segment_parameter(p, a, b);
  return (p - (a + t * (b - a))).norm();
}

/// Shortest distance from p to an open polyline.
template <typename Scalar>
Scalar point_polyline_distance(const Vec2<Scalar>& p, const Polygon<Scalar>& line)
{
  if (line.size() == 1)
    return (p - line.front()).norm();
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i)
    best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
  return best;
}

/// Shoelace area; positive for counter-clockwise rings.
template <typename Scalar>
Scalar signed_area(const Polygon<Scalar>& poly)
{
  Scalar twice = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    twice += cross2(poly[i], poly[(i + 1) % n]);
  return twice / Scalar(2);
}

template <typename Scalar>
Scalar area(const Polygon<Scalar>& poly)
{
  return std::abs(signed_area(poly));
}

/// Distance from p to the boundary of a closed ring.
template <typename Scalar>
Scalar point_boundary_distance(const Vec2<Scalar>& p, const Polygon<Scalar>& poly)
{
  Scalar best = std::numeric_limits<Scalar>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
  return best;
}

/// Even-odd crossing test. Points within `tol` of the boundary count as inside.
template <typename Scalar>
bool point_in_polygon(const Vec2<Scalar>& p, const Polygon<Scalar>& poly, Scalar tol = Scalar(1e-9))
{
  const std::size_t n = poly.size();
  if (n == 0)
    return false;
  if (point_boundary_distance(p, poly) <= tol)
    return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
  {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y()))
    {
      const Scalar x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_cross)
        inside = !inside;
    }
  }
  return inside;
}

/// Proper or touching intersection of two closed segments.
template <typename Scalar>
bool segments_intersect(const Vec2<Scalar>& p1, const Vec2<Scalar>& p2, const Vec2<Scalar>& q1,
                        const Vec2<Scalar>& q2)
{
  auto orient = [](const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& c) {
    const Scalar v = cross2<Scalar>(b - a, c - a);
    return (v > 0) - (v < 0);
  };
  auto on_segment = [](const Vec2<Scalar>& a, const Vec2<Scalar>& b, const Vec2<Scalar>& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= c.y() &&
           c.y() <= std::max(a.y(), b.y());
  };
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4)
    return true;
  if (o1 == 0 && on_segment(p1, p2, q1))
    return true;
  if (o2 == 0 && on_segment(p1, p2, q2))
    return true;
  if (o3 == 0 && on_segment(q1, q2, p1))
    return true;
  if (o4 == 0 && on_segment(q1, q2, p2))
    return true;
  return false;
}

/// Intersection point of the lines through [p1,p2] and [q1,q2]; caller guarantees they cross.
template <typename Scalar>
Vec2<Scalar> segment_intersection_point(const Vec2<Scalar>& p1, const Vec2<Scalar>& p2, const Vec2<Scalar>& q1,
                                        const Vec2<Scalar>& q2)
{
  const Vec2<Scalar> r = p2 - p1;
  const Vec2<Scalar> s = q2 - q1;
  const Scalar denom = cross2(r, s);
  if (std::abs(denom) < std::numeric_limits<Scalar>::epsilon())
    return p1;
  const Scalar t = cross2<Scalar>(q1 - p1, s) / denom;
  return p1 + std::clamp(t, Scalar(0), Scalar(1)) * r;
}

/// True when two simple polygons share any point.
template <typename Scalar>
bool polygons_intersect(const Polygon<Scalar>& a, const Polygon<Scalar>& b)
{
  if (a.empty() || b.empty())
    return false;
  if (point_in_polygon(a.front(), b) || point_in_polygon(b.front(), a))
    return true;
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      if (segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]))
        return true;
  return false;
}

/// Andrew's monotone chain. Returns a counter-clockwise hull without collinear vertices.
template <typename Scalar>
Polygon<Scalar> convex_hull(Polygon<Scalar> pts)
{
  std::sort(pts.begin(), pts.end(), [](const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3)
    return pts;

  Polygon<Scalar> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
  {
    while (k >= 2 && cross2<Scalar>(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;)
  {
    while (k >= lower && cross2<Scalar>(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Counter-clockwise axis-aligned square centred on c.
template <typename Scalar>
Polygon<Scalar> square_around(const Vec2<Scalar>& c, Scalar side)
{
  const Scalar h = side / Scalar(2);
  return {c + Vec2<Scalar>(-h, -h), c + Vec2<Scalar>(h, -h), c + Vec2<Scalar>(h, h), c + Vec2<Scalar>(-h, h)};
}

template <typename Scalar>
Vec2<Scalar> rotate(const Vec2<Scalar>& v, Scalar angle)
{
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

} // namespace tram
