#pragma once

// Scenario generators: a planar vehicle recording one range-bearing return
// per pose off a straight wall, and a 3D lawnmower survey with a push-broom
// range-azimuth-elevation scanner looking down at a seafloor.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "rae/compounding.hpp"
#include "rae/errors.hpp"
#include "rae/frame.hpp"
#include "rae/liegroup.hpp"
#include "rae/odometry.hpp"
#include "rae/random.hpp"

namespace rae {

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// ---------------------------------------------------------------------------
// Wall scenario

struct WallScenarioSpec {
  double wall_offset = 2.0;   // wall is the line y = wall_offset
  double x_start = 0.0;
  double x_end = 10.0;
  double speed = 1.0;         // m/s along +x
  double spacing = 0.5;       // m between measurements
  double mount_yaw = 0.5 * std::numbers::pi;  // sensor x-axis relative to body x
  Eigen::Vector2d mount_offset = Eigen::Vector2d::Zero();
  double beam_bearing = 0.0;  // fixed bearing of the return in the sensor frame

  SensorNoiseSpec noise{1e-2, deg_to_rad(5.0), 0.0, 1e-5};
  double sigma_alpha = deg_to_rad(1.0);  // extrinsic rotation std-dev
  double sigma_beta = 5e-3;              // extrinsic translation std-dev
  Se2Psd psd{1e-4, 1e-4};

  int central_pose = 5;  // 1-based
  std::uint64_t seed = 1;

  std::size_t pose_count() const {
    return static_cast<std::size_t>(std::floor((x_end - x_start) / spacing + 1e-9)) + 1;
  }

  void validate() const {
    if (!(spacing > 0.0)) throw ValidationError("wall scenario: spacing must be positive");
    if (!(speed > 0.0)) throw ValidationError("wall scenario: speed must be positive");
    if (!(x_end > x_start)) throw ValidationError("wall scenario: x_end must exceed x_start");
    if (central_pose < 1 || static_cast<std::size_t>(central_pose) > pose_count()) {
      std::ostringstream os;
      os << "wall scenario: central_pose " << central_pose << " outside [1, " << pose_count() << "]";
      throw ValidationError(os.str());
    }
  }

  ExtrinsicEstimate<2> extrinsic() const {
    return {Pose2(Rotation2::from_angle(mount_yaw), mount_offset),
            extrinsic_covariance_2d(sigma_alpha, sigma_beta)};
  }
};

struct WallScenario {
  std::vector<TrajectorySample<2>> trajectory;
  std::vector<RbMeasurement> measurements;        // noiseless
  std::vector<RbMeasurement> noisy_measurements;  // N(0, sigma) per channel
  std::vector<Eigen::Vector2d> wall_points;       // true hit points, world frame
  ExtrinsicEstimate<2> extrinsic;
};

inline WallScenario generate_wall_scenario(const WallScenarioSpec& spec) {
  spec.validate();
  WallScenario out;
  out.extrinsic = spec.extrinsic();
  const std::size_t n = spec.pose_count();
  const Twist2 velocity(0.0, spec.speed, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = spec.x_start + spec.spacing * static_cast<double>(k);
    const double t = (x - spec.x_start) / spec.speed;
    const Pose2 pose(Rotation2(), Eigen::Vector2d(x, 0.0));
    out.trajectory.push_back({t, pose, velocity});

    const Pose2 sensor = pose * out.extrinsic.pose;
    const Eigen::Vector2d dir =
        sensor.rotation() * Eigen::Vector2d(std::cos(spec.beam_bearing), std::sin(spec.beam_bearing));
    const double s = (spec.wall_offset - sensor.translation().y()) / dir.y();
    if (!(dir.y() != 0.0) || !(s > 0.0)) {
      throw ValidationError("wall scenario: sensor ray does not reach the wall");
    }
    out.measurements.push_back({s, wrap_angle(spec.beam_bearing), t});
    out.wall_points.push_back(sensor.translation() + s * dir);

    CounterRng rng(spec.seed, k);
    RbMeasurement noisy = out.measurements.back();
    noisy.range += spec.noise.sigma_range * rng.normal();
    noisy.bearing = wrap_angle(noisy.bearing + spec.noise.sigma_azimuth * rng.normal());
    out.noisy_measurements.push_back(noisy);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Push-broom scenario

// Seafloor z = -depth + amplitude sin(2 pi x / wavelength) cos(2 pi y / wavelength)
// in a z-up world frame.
struct SurfaceSpec {
  double depth = 5.0;
  double amplitude = 0.0;
  double wavelength = 10.0;

  double height(double x, double y) const {
    if (amplitude == 0.0) return -depth;
    const double k = 2.0 * std::numbers::pi / wavelength;
    return -depth + amplitude * std::sin(k * x) * std::cos(k * y);
  }
};

struct PushBroomScenarioSpec {
  double speed = 1.0;          // m/s
  double leg_length = 10.0;    // m per straight pass
  int legs = 2;                // lawnmower passes
  double leg_spacing = 4.0;    // m between passes; turn radius is half this
  double profile_rate = 10.0;  // Hz
  double beam_width = deg_to_rad(50.0);
  int rays_per_profile = 21;
  double max_range = 50.0;
  SurfaceSpec surface;

  // Body frame: x forward, y starboard, z down. The scanner's first axis
  // points down and its third axis forward, so azimuth fans across track.
  Pose3 mount = default_mount();
  SensorNoiseSpec noise{1e-2, deg_to_rad(3.0), deg_to_rad(0.1), 1e-5};
  double sigma_alpha = deg_to_rad(0.1);
  double sigma_beta = 5e-3;
  WnoaPsd psd{9e-6, 1e-8};
  std::uint64_t seed = 1;

  static Pose3 default_mount() {
    Eigen::Matrix3d c;
    c.col(0) = Eigen::Vector3d::UnitZ();
    c.col(1) = -Eigen::Vector3d::UnitY();
    c.col(2) = Eigen::Vector3d::UnitX();
    return Pose3(Rotation3(c), Eigen::Vector3d(0.5, 0.0, 0.0));
  }

  void validate() const {
    if (!(profile_rate > 0.0)) throw ValidationError("pushbroom scenario: profile_rate must be positive");
    if (!(beam_width > 0.0 && beam_width < std::numbers::pi))
      throw ValidationError("pushbroom scenario: beam_width must lie in (0, pi)");
    if (!(speed > 0.0)) throw ValidationError("pushbroom scenario: speed must be positive");
    if (legs < 1) throw ValidationError("pushbroom scenario: need at least one leg");
    if (rays_per_profile < 1) throw ValidationError("pushbroom scenario: need at least one ray");
    if (!(leg_length > 0.0) || !(leg_spacing > 0.0))
      throw ValidationError("pushbroom scenario: leg_length and leg_spacing must be positive");
  }

  ExtrinsicEstimate<3> extrinsic() const {
    return {mount, extrinsic_covariance_3d(sigma_alpha, sigma_beta)};
  }

  double ray_azimuth(int ray) const {
    if (rays_per_profile == 1) return 0.0;
    return -0.5 * beam_width + beam_width * ray / static_cast<double>(rays_per_profile - 1);
  }
};

struct ScanPoint {
  RaeMeasurement measurement;
  std::size_t profile = 0;  // index into the trajectory
  int ray = 0;
  Eigen::Vector3d truth = Eigen::Vector3d::Zero();  // world frame
};

struct PushBroomScenario {
  std::vector<TrajectorySample<3>> trajectory;
  std::vector<ScanPoint> points;        // noiseless
  std::vector<ScanPoint> noisy_points;  // same rays, noise in (r, a, e)
  std::size_t dropped = 0;              // rays that missed the surface
  ExtrinsicEstimate<3> extrinsic;
};

namespace detail {

struct Segment {
  double duration;
  Twist3 velocity;
};

inline std::vector<Segment> lawnmower_segments(const PushBroomScenarioSpec& spec) {
  std::vector<Segment> segs;
  const double radius = 0.5 * spec.leg_spacing;
  for (int leg = 0; leg < spec.legs; ++leg) {
    Twist3 straight = Twist3::Zero();
    straight(3) = spec.speed;
    segs.push_back({spec.leg_length / spec.speed, straight});
    if (leg + 1 < spec.legs) {
      // Body z points down, so a port (left) turn is a negative yaw rate.
      Twist3 turn = straight;
      turn(2) = (leg % 2 == 0 ? -1.0 : 1.0) * spec.speed / radius;
      segs.push_back({std::numbers::pi * radius / spec.speed, turn});
    }
  }
  return segs;
}

// First crossing of the surface along origin + s dir, s in (0, max_range].
inline std::optional<double> intersect_surface(const SurfaceSpec& surface,
                                               const Eigen::Vector3d& origin,
                                               const Eigen::Vector3d& dir, double max_range) {
  auto gap = [&](double s) {
    const Eigen::Vector3d p = origin + s * dir;
    return p.z() - surface.height(p.x(), p.y());
  };
  if (gap(0.0) <= 0.0) return std::nullopt;
  if (surface.amplitude == 0.0) {
    if (!(dir.z() < 0.0)) return std::nullopt;
    const double s = (origin.z() + surface.depth) / -dir.z();
    if (s > max_range) return std::nullopt;
    return s;
  }
  constexpr double step = 0.05;
  double lo = 0.0;
  for (double hi = step; lo < max_range; lo = hi, hi += step) {
    hi = std::min(hi, max_range);
    if (gap(hi) <= 0.0) {
      for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline PushBroomScenario generate_pushbroom_scenario(const PushBroomScenarioSpec& spec) {
  spec.validate();
  PushBroomScenario out;
  out.extrinsic = spec.extrinsic();

  const std::vector<detail::Segment> segs = detail::lawnmower_segments(spec);
  std::vector<double> seg_start;
  std::vector<Pose3> seg_pose;
  // Body x forward along world +x; body z down.
  Pose3 pose(Rotation3(Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal().toDenseMatrix()),
             Eigen::Vector3d::Zero());
  double t = 0.0;
  for (const auto& s : segs) {
    seg_start.push_back(t);
    seg_pose.push_back(pose);
    pose = pose * exp_se3(s.velocity * s.duration);
    t += s.duration;
  }
  const double total = t;

  const auto profiles = static_cast<std::size_t>(std::floor(total * spec.profile_rate + 1e-9)) + 1;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < profiles; ++k) {
    const double tk = static_cast<double>(k) / spec.profile_rate;
    while (seg + 1 < segs.size() && tk >= seg_start[seg + 1]) ++seg;
    const Pose3 body = seg_pose[seg] * exp_se3(segs[seg].velocity * (tk - seg_start[seg]));
    out.trajectory.push_back({tk, body, segs[seg].velocity});

    const Pose3 sensor = body * spec.mount;
    for (int ray = 0; ray < spec.rays_per_profile; ++ray) {
      const double az = spec.ray_azimuth(ray);
      const Eigen::Vector3d dir = sensor.rotation() * direction_from_angles(az, 0.0);
      const auto s = detail::intersect_surface(spec.surface, sensor.translation(), dir, spec.max_range);
      if (!s) {
        ++out.dropped;
        continue;
      }
      ScanPoint p;
      p.measurement = {*s, az, 0.0, tk};
      p.profile = k;
      p.ray = ray;
      p.truth = sensor.translation() + *s * dir;
      out.points.push_back(p);

      CounterRng rng(spec.seed, k * static_cast<std::uint64_t>(spec.rays_per_profile) + ray);
      ScanPoint noisy = p;
      noisy.measurement.range += spec.noise.sigma_range * rng.normal();
      noisy.measurement.azimuth = wrap_angle(az + spec.noise.sigma_azimuth * rng.normal());
      noisy.measurement.elevation += spec.noise.sigma_elevation * rng.normal();
      out.noisy_points.push_back(noisy);
    }
  }
  return out;
}

}  // namespace rae
