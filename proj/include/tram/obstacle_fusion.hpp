#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tram/track_map.hpp"

namespace tram::fusion
{

enum class SensorKind
{
  CameraSim,
  LidarSim,
  RadarSim
};

enum class ObjectClass
{
  Pedestrian,
  Car,
  Tram,
  Unknown,
  Infrastructure
};

std::string_view to_string(SensorKind k);
std::string_view to_string(ObjectClass c);
std::optional<ObjectClass> parse_object_class(std::string_view s);

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

/// Map-frame object detection. Covariance is 2x2 for position-only
/// measurements and 4x4 when velocity is present.
struct ObjectMeasurement
{
  SensorKind sensor = SensorKind::LidarSim;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  std::optional<Eigen::Vector2d> velocity;
  ObjectClass cls = ObjectClass::Unknown;
  Eigen::MatrixXd covariance = Eigen::Matrix2d::Identity();

  Eigen::Index dim() const { return velocity ? 4 : 2; }
  Eigen::VectorXd z() const;
  Eigen::MatrixXd H() const;
};

enum class TrackStatus
{
  Tentative,
  Confirmed,
  Dead
};

inline constexpr std::size_t kClassVoteWindow = 10;

/// Constant-velocity track, state (x, y, vx, vy).
struct FusedTrack
{
  int id = 0;
  Vector4 state = Vector4::Zero();
  Matrix4 covariance = Matrix4::Identity();
  ObjectClass cls = ObjectClass::Unknown;
  std::deque<ObjectClass> class_history;
  int hits = 0;
  int misses = 0;
  TrackStatus status = TrackStatus::Tentative;

  Eigen::Vector2d position() const { return state.head<2>(); }
  Eigen::Vector2d velocity() const { return state.tail<2>(); }
};

Matrix4 cv_transition(double dt);

/// White-acceleration process noise with intensity q (m^2/s^3).
Matrix4 process_noise(double dt, double q);

FusedTrack predict_track(const FusedTrack& track, double dt, double q);

/// Squared Mahalanobis distance of the innovation; nullopt when S is singular.
std::optional<double> mahalanobis(const FusedTrack& track, const ObjectMeasurement& meas);

struct Association
{
  std::vector<std::pair<std::size_t, std::size_t>> pairs; // (track index, measurement index)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_measurements;
};

/// Greedy global nearest neighbour: repeatedly take the smallest gated d^2
/// among unassigned pairs; ties go to the lower (track id, measurement index).
/// Dead tracks never associate.
Association associate(std::span<const FusedTrack> tracks, std::span<const ObjectMeasurement> measurements, double gate);

/// Kalman update in Joseph form; increments hits, clears misses, votes class.
FusedTrack update_track(const FusedTrack& track, const ObjectMeasurement& meas);

struct TrackManagementParams
{
  int m_confirm = 3;
  int k_delete = 5;
  double initial_velocity_var = 25.0;
};

/// Spawns Tentative tracks from unmatched measurements, counts misses on
/// unmatched tracks, promotes on hits >= m_confirm and removes tracks whose
/// consecutive misses reach k_delete.
std::vector<FusedTrack> manage_tracks(std::vector<FusedTrack> tracks,
                                      std::span<const ObjectMeasurement> unmatched_measurements,
                                      std::span<const std::size_t> unmatched_tracks, const TrackManagementParams& params,
                                      int& next_id);

/// Drops Infrastructure/Unknown measurements outside the lateral corridor.
/// Pedestrians, cars and trams always pass.
std::vector<ObjectMeasurement> infrastructure_prefilter(std::span<const ObjectMeasurement> measurements,
                                                        const map::TrackMap& map, double corridor_half_width);

/// 99% chi-square quantile for the measurement dimension.
double default_gate(Eigen::Index dim);

struct FusionConfig
{
  double q = 0.5;
  double gate = 9.21;
  // unmatched measurements this close (d^2) to an existing track are dropped
  // instead of spawning a duplicate; 0 disables
  double spawn_exclusion = 25.0;
  TrackManagementParams management;
  double prefilter_half_width = 2.5;
};

/// Late-fusion tracker. Per tick: one prediction, then each sensor batch is
/// associated and applied in the order given.
class Tracker
{
public:
  explicit Tracker(FusionConfig config = {}) : config_(config) {}

  void step(double dt, std::span<const std::vector<ObjectMeasurement>> batches);

  const std::vector<FusedTrack>& tracks() const { return tracks_; }
  std::vector<FusedTrack> confirmed() const;

private:
  FusionConfig config_;
  std::vector<FusedTrack> tracks_;
  int next_id_ = 1;
};

} // namespace tram::fusion
