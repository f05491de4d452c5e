#include "tram/track_map.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tram/errors.hpp"

namespace tram::map
{

namespace
{

constexpr double kChainageTol = 1e-9;
constexpr double kDuplicateTol = 1e-9;

std::vector<Point2d> drop_duplicates(std::span<const Point2d> pts)
{
  std::vector<Point2d> out;
  out.reserve(pts.size());
  for (const auto& p : pts)
  {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw InvalidInput("track point is not finite");
    if (out.empty() || (p - out.back()).norm() > kDuplicateTol)
      out.push_back(p);
  }
  return out;
}

std::string element_name(const InfrastructureElement& e, std::size_t index)
{
  std::ostringstream os;
  os << to_string(e.kind) << " '" << (e.id.empty() ? std::to_string(index) : e.id) << "'";
  return os.str();
}

void validate_element(const InfrastructureElement& e, std::size_t index, double length)
{
  const auto fail = [&](const std::string& why) { throw InvalidMap(element_name(e, index) + ": " + why); };
  if (!std::isfinite(e.s_start) || !std::isfinite(e.s_end))
    fail("chainage is not finite");
  if (e.s_start > e.s_end)
    fail("s_start > s_end");
  if (e.s_start < -kChainageTol || e.s_end > length + kChainageTol)
  {
    std::ostringstream os;
    os << "interval [" << e.s_start << ", " << e.s_end << "] outside track [0, " << length << "]";
    fail(os.str());
  }
  switch (e.kind)
  {
  case ElementKind::SpeedLimit:
    if (!e.speed_limit() || !(e.speed_limit()->limit > 0.0))
      fail("speed limit must be > 0");
    break;
  case ElementKind::Signal: {
    const auto* sig = e.signal();
    if (!sig)
      fail("missing signal attributes");
    if (!(sig->stop_point_s < e.s_start) && e.s_start > 0.0)
      fail("stop point must lie before the signal");
    if (sig->commit_point_s > sig->stop_point_s)
      fail("commit point must not lie after the stop point");
    if (sig->stop_point_s < -kChainageTol || sig->commit_point_s < -kChainageTol)
      fail("stop/commit point before track start");
    break;
  }
  case ElementKind::Platform:
    if (!e.platform())
      fail("missing platform attributes");
    if (e.platform()->stop_point_s < -kChainageTol || e.platform()->stop_point_s > length + kChainageTol)
      fail("platform stop point outside track");
    break;
  default: break;
  }
}

} // namespace

std::string_view to_string(ElementKind k)
{
  switch (k)
  {
  case ElementKind::Platform: return "Platform";
  case ElementKind::Signal: return "Signal";
  case ElementKind::RoadCrossing: return "RoadCrossing";
  case ElementKind::PedestrianCrossing: return "PedestrianCrossing";
  case ElementKind::SpeedLimit: return "SpeedLimit";
  case ElementKind::GridSeparator: return "GridSeparator";
  }
  return "?";
}

std::optional<ElementKind> parse_element_kind(std::string_view s)
{
  for (auto k : {ElementKind::Platform, ElementKind::Signal, ElementKind::RoadCrossing, ElementKind::PedestrianCrossing,
                 ElementKind::SpeedLimit, ElementKind::GridSeparator})
    if (to_string(k) == s)
      return k;
  return std::nullopt;
}

TrackMap::TrackMap(std::vector<Point2d> points, std::vector<InfrastructureElement> elements)
  : points_(drop_duplicates(points)), elements_(std::move(elements))
{
  if (points_.size() < 2)
    throw InvalidInput("track needs at least two distinct points");
  chainage_.resize(points_.size());
  chainage_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i)
    chainage_[i] = chainage_[i - 1] + (points_[i] - points_[i - 1]).norm();
  for (std::size_t i = 0; i < elements_.size(); ++i)
    validate_element(elements_[i], i, total_length());
}

std::size_t TrackMap::segment_index(double s) const
{
  const auto it = std::upper_bound(chainage_.begin(), chainage_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(chainage_.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, points_.size() - 2);
}

TrackPose TrackMap::point_at(double s) const
{
  if (!(s >= -kChainageTol && s <= total_length() + kChainageTol))
  {
    std::ostringstream os;
    os << "chainage " << s << " outside [0, " << total_length() << "]";
    throw RangeError(os.str());
  }
  s = std::clamp(s, 0.0, total_length());
  const std::size_t i = segment_index(s);
  const Point2d d = points_[i + 1] - points_[i];
  const double seg_len = chainage_[i + 1] - chainage_[i];
  const double t = (s - chainage_[i]) / seg_len;
  return {points_[i] + t * d, std::atan2(d.y(), d.x())};
}

Projection TrackMap::project(const Point2d& p) const
{
  Projection best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i + 1 < points_.size(); ++i)
  {
    const Point2d& a = points_[i];
    const Point2d& b = points_[i + 1];
    const double t = segment_parameter(p, a, b);
    const Point2d closest = a + t * (b - a);
    const double dist = (p - closest).norm();
    if (dist < best.distance)
    {
      const double side = cross2<double>(b - a, p - closest);
      best = {chainage_[i] + t * (chainage_[i + 1] - chainage_[i]), side >= 0.0 ? dist : -dist, dist};
    }
  }
  return best;
}

const InfrastructureElement* TrackMap::find_signal(std::string_view signal_id) const
{
  for (const auto& e : elements_)
    if (const auto* sig = e.signal(); sig && sig->signal_id == signal_id)
      return &e;
  return nullptr;
}

std::vector<Point2d> simplify_polyline(std::span<const Point2d> points, double tolerance)
{
  if (points.size() < 2)
    throw InvalidInput("simplify_polyline needs at least two points");
  if (!(tolerance > 0.0))
    throw InvalidInput("simplify_polyline tolerance must be > 0");

  std::vector<bool> keep(points.size(), false);
  keep.front() = keep.back() = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, points.size() - 1}};
  while (!stack.empty())
  {
    const auto [first, last] = stack.back();
    stack.pop_back();
    double worst = -1.0;
    std::size_t worst_idx = first;
    for (std::size_t i = first + 1; i < last; ++i)
    {
      const double d = point_segment_distance(points[i], points[first], points[last]);
      if (d > worst)
      {
        worst = d;
        worst_idx = i;
      }
    }
    if (worst > tolerance)
    {
      keep[worst_idx] = true;
      stack.emplace_back(first, worst_idx);
      stack.emplace_back(worst_idx, last);
    }
  }

  std::vector<Point2d> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (keep[i])
      out.push_back(points[i]);
  return out;
}

TrackMap build_map(std::span<const Point2d> trajectory, double tolerance, std::vector<InfrastructureElement> elements)
{
  const auto cleaned = drop_duplicates(trajectory);
  if (cleaned.size() < 2)
    throw InvalidInput("trajectory needs at least two distinct points");
  return TrackMap(simplify_polyline(cleaned, tolerance), std::move(elements));
}

DigitalHorizon digital_horizon(const TrackMap& map, double s, double lookahead)
{
  if (!(lookahead > 0.0))
    throw InvalidInput("horizon lookahead must be > 0");
  const TrackPose origin = map.point_at(s); // range check
  s = std::clamp(s, 0.0, map.total_length());

  DigitalHorizon h;
  h.origin_s = s;
  h.lookahead = lookahead;
  h.end_s = std::min(s + lookahead, map.total_length());

  const auto& elements = map.elements();
  for (std::size_t i = 0; i < elements.size(); ++i)
  {
    const auto& e = elements[i];
    if (e.s_end > s && e.s_start <= h.end_s)
      h.events.push_back({std::max(0.0, e.s_start - s), i, e});
  }
  std::stable_sort(h.events.begin(), h.events.end(),
                   [](const HorizonEvent& a, const HorizonEvent& b) { return a.distance_ahead < b.distance_ahead; });

  h.geometry.push_back(origin.position);
  const auto& ch = map.chainage();
  for (std::size_t i = 0; i < ch.size(); ++i)
    if (ch[i] > s && ch[i] < h.end_s)
      h.geometry.push_back(map.points()[i]);
  if (h.end_s > s)
    h.geometry.push_back(map.point_at(h.end_s).position);
  return h;
}

std::vector<double> corridor_samples(const TrackMap& map, double s_start, double s_end, double sample_step)
{
  std::vector<double> samples;
  const auto n_steps = static_cast<std::size_t>(std::floor((s_end - s_start) / sample_step));
  for (std::size_t k = 0; k <= n_steps; ++k)
    samples.push_back(s_start + static_cast<double>(k) * sample_step);
  for (double c : map.chainage())
    if (c > s_start && c < s_end)
      samples.push_back(c);
  samples.push_back(s_end);
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end(), [](double a, double b) { return b - a < 1e-6; }),
                samples.end());
  // keep the exact end even if a grid sample landed within 1e-6 of it
  samples.back() = s_end;
  return samples;
}

Polygon2d clearance_corridor(const TrackMap& map, double s_start, double s_end, double half_width,
                             double sample_step)
{
  if (!(half_width > 0.0))
    throw InvalidInput("corridor half width must be > 0");
  if (s_start < -kChainageTol || s_end > map.total_length() + kChainageTol)
    throw RangeError("corridor span outside track");
  if (!(s_end - s_start >= sample_step))
    throw InvalidInput("corridor span shorter than one sample step");

  const auto& pts = map.points();
  const auto& ch = map.chainage();

  auto left_normal = [&](std::size_t seg) {
    const Point2d d = (pts[seg + 1] - pts[seg]).normalized();
    return Point2d(-d.y(), d.x());
  };
  auto miter = [&](std::size_t v) {
    const Point2d n1 = left_normal(v - 1);
    const Point2d n2 = left_normal(v);
    return Point2d((n1 + n2) / std::max(1.0 + n1.dot(n2), 0.25));
  };

  // A grid sample closer to a vertex than the miter reaches along the track
  // would fold the inner edge back on itself, so drop it.
  auto samples = corridor_samples(map, s_start, s_end, sample_step);
  std::vector<std::pair<double, double>> reach; // (vertex chainage, along-track reach)
  for (std::size_t v = 1; v + 1 < pts.size(); ++v)
    if (ch[v] > s_start && ch[v] < s_end)
    {
      const Point2d d = (pts[v] - pts[v - 1]).normalized();
      reach.emplace_back(ch[v], half_width * std::abs(miter(v).dot(d)));
    }
  std::erase_if(samples, [&](double s) {
    if (s == s_start || s == s_end)
      return false;
    return std::any_of(reach.begin(), reach.end(), [&](const auto& r) {
      const double gap = std::abs(s - r.first);
      return gap > 1e-9 && gap <= r.second + 1e-9;
    });
  });

  std::vector<Point2d> right;
  std::vector<Point2d> left;
  right.reserve(samples.size());
  left.reserve(samples.size());
  for (double s : samples)
  {
    const Point2d c = map.point_at(s).position;
    const std::size_t seg = map.segment_index(s);
    Point2d offset = left_normal(seg);
    // interior vertex: miter so both adjacent edges stay half_width away
    const bool at_vertex_start = seg > 0 && std::abs(s - ch[seg]) < 1e-9;
    const bool at_vertex_end = seg + 2 < pts.size() && std::abs(s - ch[seg + 1]) < 1e-9;
    if (at_vertex_start || at_vertex_end)
    {
      offset = miter(at_vertex_start ? seg : seg + 1);
    }
    right.push_back(c - half_width * offset);
    left.push_back(c + half_width * offset);
  }

  Polygon2d ring = std::move(right);
  ring.insert(ring.end(), left.rbegin(), left.rend());
  return ring;
}

} // namespace tram::map
