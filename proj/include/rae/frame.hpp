#pragma once

// Range-bearing and range-azimuth-elevation measurements as group elements.
//
// A measurement of point p from sensor datum s becomes the pose T_ps in
// SE(2)/SE(3) whose rotation is the measurement-aligned frame C_lm (first
// basis vector along the range direction) and whose translation is
// C_lm * [r, 0(, 0)].

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "rae/errors.hpp"
#include "rae/liegroup.hpp"

namespace rae {

struct RbMeasurement {
  double range = 0.0;    // m
  double bearing = 0.0;  // rad, (-pi, pi]
  double time = 0.0;     // s
};

struct RaeMeasurement {
  double range = 0.0;      // m
  double azimuth = 0.0;    // rad, (-pi, pi]
  double elevation = 0.0;  // rad, (-pi/2, pi/2)
  double time = 0.0;       // s
};

// Sensor-frame rotation C_lm whose first column is the unit range direction.
struct MeasurementFrame {
  Rotation3 rotation;
  Eigen::Vector3d range_direction() const { return rotation.matrix().col(0); }
};

namespace detail {
inline void require_positive_range(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    std::ostringstream os;
    os << "range must be positive and finite, got " << r;
    throw NonPositiveRange(os.str());
  }
}
}  // namespace detail

inline Pose2 rb_to_pose2(const RbMeasurement& y) {
  detail::require_positive_range(y.range);
  const Rotation2 c = Rotation2::from_angle(wrap_angle(y.bearing));
  return Pose2(c, c * Eigen::Vector2d(y.range, 0.0));
}

// Unit direction [cos e cos a, cos e sin a, sin e]: azimuth about the sensor
// third axis, elevation lifting toward it.
inline Eigen::Vector3d direction_from_angles(double azimuth, double elevation) {
  const double half_pi = 0.5 * std::numbers::pi;
  if (!(elevation > -half_pi && elevation < half_pi)) {
    std::ostringstream os;
    os << "elevation " << elevation << " rad is outside (-pi/2, pi/2)";
    throw ElevationOutOfRange(os.str());
  }
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

// Threshold on |<m1, l2>| above which the seed l2 is swapped for l3.
inline constexpr double kDegenerateSeed = 1.0 - 1e-8;

inline MeasurementFrame gram_schmidt_frame(const Eigen::Vector3d& m1) {
  const Eigen::Vector3d seed =
      std::abs(m1.y()) > kDegenerateSeed ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitY();
  Eigen::Vector3d u2 = seed - m1.dot(seed) * m1;
  // Second pass keeps orthogonality when the seed is nearly parallel to m1.
  u2 -= m1.dot(u2) * m1;
  const Eigen::Vector3d m2 = u2.normalized();
  const Eigen::Vector3d m3 = m1.cross(m2);
  Eigen::Matrix3d c;
  c.col(0) = m1;
  c.col(1) = m2;
  c.col(2) = m3;
  return {Rotation3(c)};
}

inline Pose3 rae_to_pose3(const RaeMeasurement& y) {
  detail::require_positive_range(y.range);
  const Eigen::Vector3d m1 = direction_from_angles(wrap_angle(y.azimuth), y.elevation);
  const MeasurementFrame frame = gram_schmidt_frame(m1);
  return Pose3(frame.rotation, y.range * m1);
}

// Inverse maps: recover the measurement from the translation of T_ps.
inline RbMeasurement pose2_to_rb(const Pose2& t, double time = 0.0) {
  const Eigen::Vector2d& r = t.translation();
  return {r.norm(), std::atan2(r.y(), r.x()), time};
}

inline RaeMeasurement pose3_to_rae(const Pose3& t, double time = 0.0) {
  const Eigen::Vector3d& r = t.translation();
  const double range = r.norm();
  return {range, std::atan2(r.y(), r.x()), std::asin(std::clamp(r.z() / range, -1.0, 1.0)), time};
}

}  // namespace rae
