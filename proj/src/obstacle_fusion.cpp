#include "tram/obstacle_fusion.hpp"

#include <algorithm>
#include <array>
#include <tuple>

#include "tram/errors.hpp"

namespace tram::fusion
{

std::string_view to_string(SensorKind k)
{
  switch (k)
  {
  case SensorKind::CameraSim: return "CameraSim";
  case SensorKind::LidarSim: return "LidarSim";
  case SensorKind::RadarSim: return "RadarSim";
  }
  return "?";
}

std::string_view to_string(ObjectClass c)
{
  switch (c)
  {
  case ObjectClass::Pedestrian: return "Pedestrian";
  case ObjectClass::Car: return "Car";
  case ObjectClass::Tram: return "Tram";
  case ObjectClass::Unknown: return "Unknown";
  case ObjectClass::Infrastructure: return "Infrastructure";
  }
  return "?";
}

std::optional<ObjectClass> parse_object_class(std::string_view s)
{
  for (auto c : {ObjectClass::Pedestrian, ObjectClass::Car, ObjectClass::Tram, ObjectClass::Unknown,
                 ObjectClass::Infrastructure})
    if (to_string(c) == s)
      return c;
  return std::nullopt;
}

Eigen::VectorXd ObjectMeasurement::z() const
{
  Eigen::VectorXd out(dim());
  out.head<2>() = position;
  if (velocity)
    out.tail<2>() = *velocity;
  return out;
}

Eigen::MatrixXd ObjectMeasurement::H() const
{
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), 4);
  h.leftCols(dim()).setIdentity();
  return h;
}

Matrix4 cv_transition(double dt)
{
  Matrix4 F = Matrix4::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;
  return F;
}

Matrix4 process_noise(double dt, double q)
{
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  Matrix4 Q = Matrix4::Zero();
  Q(0, 0) = Q(1, 1) = dt3 / 3.0;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = dt2 / 2.0;
  Q(2, 2) = Q(3, 3) = dt;
  return q * Q;
}

FusedTrack predict_track(const FusedTrack& track, double dt, double q)
{
  if (dt < 0.0)
    throw InvalidInput("predict_track dt must be >= 0");
  FusedTrack out = track;
  if (dt == 0.0)
    return out;
  const Matrix4 F = cv_transition(dt);
  out.state = F * track.state;
  out.covariance = F * track.covariance * F.transpose() + process_noise(dt, q);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

std::optional<double> mahalanobis(const FusedTrack& track, const ObjectMeasurement& meas)
{
  const Eigen::MatrixXd H = meas.H();
  const Eigen::MatrixXd S = H * track.covariance * H.transpose() + meas.covariance;
  const Eigen::VectorXd nu = meas.z() - H * track.state;
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    return std::nullopt;
  return nu.dot(llt.solve(nu));
}

Association associate(std::span<const FusedTrack> tracks, std::span<const ObjectMeasurement> measurements, double gate)
{
  if (!(gate > 0.0))
    throw InvalidInput("association gate must be > 0");

  struct Candidate
  {
    double d2;
    int track_id;
    std::size_t meas;
    std::size_t track;
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < tracks.size(); ++t)
  {
    if (tracks[t].status == TrackStatus::Dead)
      continue;
    for (std::size_t m = 0; m < measurements.size(); ++m)
    {
      const auto d2 = mahalanobis(tracks[t], measurements[m]);
      if (d2 && *d2 <= gate)
        candidates.push_back({*d2, tracks[t].id, m, t});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.d2, a.track_id, a.meas) < std::tie(b.d2, b.track_id, b.meas);
  });

  Association out;
  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> meas_used(measurements.size(), false);
  for (const auto& c : candidates)
  {
    if (track_used[c.track] || meas_used[c.meas])
      continue;
    track_used[c.track] = meas_used[c.meas] = true;
    out.pairs.emplace_back(c.track, c.meas);
  }
  for (std::size_t t = 0; t < tracks.size(); ++t)
    if (!track_used[t] && tracks[t].status != TrackStatus::Dead)
      out.unmatched_tracks.push_back(t);
  for (std::size_t m = 0; m < measurements.size(); ++m)
    if (!meas_used[m])
      out.unmatched_measurements.push_back(m);
  return out;
}

namespace
{

ObjectClass vote(const std::deque<ObjectClass>& history)
{
  std::array<int, 5> counts{};
  for (auto c : history)
    ++counts[static_cast<std::size_t>(c)];
  const int best = *std::max_element(counts.begin(), counts.end());
  // most recent among the tied majority
  for (auto it = history.rbegin(); it != history.rend(); ++it)
    if (counts[static_cast<std::size_t>(*it)] == best)
      return *it;
  return ObjectClass::Unknown;
}

void push_class(FusedTrack& track, ObjectClass c)
{
  track.class_history.push_back(c);
  while (track.class_history.size() > kClassVoteWindow)
    track.class_history.pop_front();
  track.cls = vote(track.class_history);
}

} // namespace

FusedTrack update_track(const FusedTrack& track, const ObjectMeasurement& meas)
{
  const Eigen::MatrixXd H = meas.H();
  const Eigen::MatrixXd& R = meas.covariance;
  const Eigen::MatrixXd S = H * track.covariance * H.transpose() + R;
  const Eigen::MatrixXd K = track.covariance * H.transpose() * S.inverse();
  const Eigen::MatrixXd I_KH = Matrix4::Identity() - K * H;

  FusedTrack out = track;
  out.state = track.state + K * (meas.z() - H * track.state);
  out.covariance = I_KH * track.covariance * I_KH.transpose() + K * R * K.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.hits = track.hits + 1;
  out.misses = 0;
  push_class(out, meas.cls);
  return out;
}

std::vector<FusedTrack> manage_tracks(std::vector<FusedTrack> tracks,
                                      std::span<const ObjectMeasurement> unmatched_measurements,
                                      std::span<const std::size_t> unmatched_tracks, const TrackManagementParams& params,
                                      int& next_id)
{
  if (params.m_confirm < 1 || params.k_delete < 1)
    throw InvalidInput("track management parameters must be >= 1");

  for (std::size_t idx : unmatched_tracks)
    if (idx < tracks.size())
      ++tracks[idx].misses;

  for (const auto& m : unmatched_measurements)
  {
    FusedTrack t;
    t.id = next_id++;
    t.state.head<2>() = m.position;
    t.covariance = Matrix4::Zero();
    t.covariance.topLeftCorner<2, 2>() = m.covariance.topLeftCorner<2, 2>();
    if (m.velocity)
    {
      t.state.tail<2>() = *m.velocity;
      t.covariance.bottomRightCorner<2, 2>() = m.covariance.bottomRightCorner<2, 2>();
    }
    else
    {
      t.covariance.bottomRightCorner<2, 2>() = params.initial_velocity_var * Eigen::Matrix2d::Identity();
    }
    t.hits = 1;
    push_class(t, m.cls);
    tracks.push_back(std::move(t));
  }

  for (auto& t : tracks)
  {
    if (t.status == TrackStatus::Tentative && t.hits >= params.m_confirm)
      t.status = TrackStatus::Confirmed;
    if (t.misses >= params.k_delete)
      t.status = TrackStatus::Dead;
  }
  std::erase_if(tracks, [](const FusedTrack& t) { return t.status == TrackStatus::Dead; });
  return tracks;
}

std::vector<ObjectMeasurement> infrastructure_prefilter(std::span<const ObjectMeasurement> measurements,
                                                        const map::TrackMap& map, double corridor_half_width)
{
  std::vector<ObjectMeasurement> kept;
  kept.reserve(measurements.size());
  for (const auto& m : measurements)
  {
    const bool static_class = m.cls == ObjectClass::Infrastructure || m.cls == ObjectClass::Unknown;
    if (static_class && std::abs(map.project(m.position).lateral) > corridor_half_width)
      continue;
    kept.push_back(m);
  }
  return kept;
}

double default_gate(Eigen::Index dim)
{
  switch (dim)
  {
  case 1: return 6.635;
  case 2: return 9.210;
  case 3: return 11.345;
  case 4: return 13.277;
  default: throw InvalidInput("no default gate for this measurement dimension");
  }
}

void Tracker::step(double dt, std::span<const std::vector<ObjectMeasurement>> batches)
{
  for (auto& t : tracks_)
    t = predict_track(t, dt, config_.q);

  const std::size_t existing = tracks_.size();
  std::vector<bool> matched(existing, false);
  for (const auto& batch : batches)
  {
    if (batch.empty())
      continue;
    const double gate = batch.front().dim() == 2 ? config_.gate : default_gate(batch.front().dim());
    const auto assoc = associate(tracks_, batch, gate);
    for (const auto& [t, m] : assoc.pairs)
    {
      tracks_[t] = update_track(tracks_[t], batch[m]);
      if (t < existing)
        matched[t] = true;
    }
    std::vector<ObjectMeasurement> spawn;
    for (std::size_t m : assoc.unmatched_measurements)
    {
      const bool near_track = std::any_of(tracks_.begin(), tracks_.end(), [&](const FusedTrack& t) {
        const auto d2 = mahalanobis(t, batch[m]);
        return d2 && *d2 < config_.spawn_exclusion;
      });
      if (!near_track)
        spawn.push_back(batch[m]);
    }
    tracks_ = manage_tracks(std::move(tracks_), spawn, {}, config_.management, next_id_);
  }

  std::vector<std::size_t> missed;
  for (std::size_t t = 0; t < existing; ++t)
    if (!matched[t])
      missed.push_back(t);
  tracks_ = manage_tracks(std::move(tracks_), {}, missed, config_.management, next_id_);
}

std::vector<FusedTrack> Tracker::confirmed() const
{
  std::vector<FusedTrack> out;
  for (const auto& t : tracks_)
    if (t.status == TrackStatus::Confirmed)
      out.push_back(t);
  return out;
}

} // namespace tram::fusion
