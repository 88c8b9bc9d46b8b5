#pragma once

// Sensor-, vehicle-, and submap-level measurement covariances.
//
// Notation follows the datum/frame superscript-subscript convention:
//   T_ps   = T^{ps}_{lm}   measurement of point p from sensor datum s
//   T_sz   = T^{sz}_{bl}   sensor-to-vehicle extrinsics
//   T_zzc  = T^{z zc}_{bc b} relative pose, measurement pose wrt central pose
// and every covariance is that of a right perturbation.

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "rae/covariance.hpp"
#include "rae/errors.hpp"
#include "rae/frame.hpp"
#include "rae/liegroup.hpp"

namespace rae {

struct SensorNoiseSpec {
  double sigma_range = 1e-2;    // m
  double sigma_azimuth = 0.0;   // rad; the bearing std-dev in 2D
  double sigma_elevation = 0.0; // rad; unused in 2D
  double delta = 1e-5;          // floor on non-informative slots

  // Strict positivity plus delta <= min(sigma_r, sigma_azimuth) / 10.
  void validate(bool three_d) const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be positive, got " << v;
        throw ValidationError(os.str());
      }
    };
    positive(sigma_range, "sigma_r");
    positive(sigma_azimuth, three_d ? "sigma_azimuth" : "sigma_bearing");
    if (three_d) positive(sigma_elevation, "sigma_elevation");
    positive(delta, "delta");
    if (delta > std::min(sigma_range, sigma_azimuth) / 10.0) {
      std::ostringstream os;
      os << "delta " << delta << " exceeds min(sigma_r, sigma_azimuth)/10";
      throw ValidationError(os.str());
    }
  }
};

// Where the two angular variances go on the SE(3) sensor covariance.
enum class SlotOrder {
  // diag(s_el^2, s_az^2, d^2, s_r^2, d^2, d^2), exactly as written for the
  // RAE sensor. The first slot rotates about the range axis and produces no
  // positional spread at the measured point.
  paper_literal,
  // diag(d^2, s_el^2, s_az^2, s_r^2, d^2, d^2): each angular variance on a
  // rotation axis perpendicular to the range direction.
  perpendicular_axes,
};

template <int N>
struct ExtrinsicEstimate {
  Pose<N> pose;                  // T_sz
  PoseCovariance<N> covariance;  // about the sensor datum, sensor frame
};

// Sigma^s_m for a range-bearing sensor, twist order [theta; rho1; rho2].
inline Covariance<3> sensor_covariance_2d(const SensorNoiseSpec& spec) {
  Covariance<3> c;
  c.matrix.diagonal() << spec.sigma_azimuth * spec.sigma_azimuth,
      spec.sigma_range * spec.sigma_range, spec.delta * spec.delta;
  c.point = Datum::sensor;
  c.frame = Frame::measurement;
  return c;
}

// Sigma^s_m for a range-azimuth-elevation sensor.
inline Covariance<6> sensor_covariance_3d(const SensorNoiseSpec& spec,
                                          SlotOrder order = SlotOrder::perpendicular_axes) {
  const double d2 = spec.delta * spec.delta;
  const double az2 = spec.sigma_azimuth * spec.sigma_azimuth;
  const double el2 = spec.sigma_elevation * spec.sigma_elevation;
  const double r2 = spec.sigma_range * spec.sigma_range;
  Covariance<6> c;
  if (order == SlotOrder::paper_literal) {
    c.matrix.diagonal() << el2, az2, d2, r2, d2, d2;
  } else {
    c.matrix.diagonal() << d2, el2, az2, r2, d2, d2;
  }
  c.point = Datum::sensor;
  c.frame = Frame::measurement;
  return c;
}

inline Covariance<3> extrinsic_covariance_2d(double sigma_rot, double sigma_trans) {
  Covariance<3> c;
  c.matrix.diagonal() << sigma_rot * sigma_rot, sigma_trans * sigma_trans,
      sigma_trans * sigma_trans;
  c.point = Datum::sensor;
  c.frame = Frame::sensor;
  return c;
}

inline Covariance<6> extrinsic_covariance_3d(double sigma_rot, double sigma_trans) {
  Covariance<6> c;
  c.matrix.diagonal().head<3>().setConstant(sigma_rot * sigma_rot);
  c.matrix.diagonal().tail<3>().setConstant(sigma_trans * sigma_trans);
  c.point = Datum::sensor;
  c.frame = Frame::sensor;
  return c;
}

// T^{sp}_{mm} = (I, [-r, 0(, 0)]).
template <int N>
Pose<N> sensor_from_point_offset(double range) {
  VectorN<N> r = VectorN<N>::Zero();
  r(0) = -range;
  return Pose<N>::from_translation(r);
}

// Sigma^p_m = Adj(T^{sp}_{mm}) Sigma^s_m Adj(T^{sp}_{mm})^T.
template <int N>
PoseCovariance<N> propagate_to_point(double range, const PoseCovariance<N>& sensor) {
  require_tags(sensor, Datum::sensor, Frame::measurement, "propagate_to_point");
  if (!(range >= 0.0)) {
    std::ostringstream os;
    os << "propagate_to_point: range must be non-negative, got " << range;
    throw NonPositiveRange(os.str());
  }
  const AdjointMatrix<N> adj = sensor_from_point_offset<N>(range).adjoint();
  return {congruence(adj, sensor.matrix), Datum::point, Frame::measurement};
}

// Vehicle-level measurement (T_pz, Xi^p_m):
//   Xi = Adj(T_ps^-1) Sigma^s_l Adj(T_ps^-1)^T + Sigma^p_m.
template <int N>
GaussianPose<N> compound_extrinsic(const ExtrinsicEstimate<N>& extrinsic,
                                   const Pose<N>& t_ps,
                                   const PoseCovariance<N>& point_cov) {
  require_tags(extrinsic.covariance, Datum::sensor, Frame::sensor, "compound_extrinsic");
  require_tags(point_cov, Datum::point, Frame::measurement, "compound_extrinsic");
  const AdjointMatrix<N> adj = t_ps.inverse().adjoint();
  PoseCovariance<N> xi{congruence(adj, extrinsic.covariance.matrix) + point_cov.matrix,
                       Datum::point, Frame::measurement};
  return {extrinsic.pose * t_ps, xi};
}

// Submap-level measurement (T_pzc, Gamma^p_m):
//   Gamma = Adj(T_pz^-1) Sigma^z_b Adj(T_pz^-1)^T + Xi^p_m.
// `relative` carries T^{z zc}_{bc b} and Sigma^z_b.
template <int N>
GaussianPose<N> compound_odometry(const GaussianPose<N>& relative,
                                  const GaussianPose<N>& vehicle_level) {
  require_tags(relative.covariance, Datum::vehicle, Frame::vehicle, "compound_odometry");
  require_tags(vehicle_level.covariance, Datum::point, Frame::measurement, "compound_odometry");
  const AdjointMatrix<N> adj = vehicle_level.mean.inverse().adjoint();
  PoseCovariance<N> gamma{
      congruence(adj, relative.covariance.matrix) + vehicle_level.covariance.matrix,
      Datum::point, Frame::measurement};
  return {relative.mean * vehicle_level.mean, gamma};
}

// Closed-form compound model
//   T_pzc = T_zzc T_sz T_ps
//   Gamma = Adj(T_zp) Sigma^z_b Adj(T_zp)^T + Adj(T_sp) Sigma^s_l Adj(T_sp)^T
//         + Adj(T_sp,mm) Sigma^s_m Adj(T_sp,mm)^T
// with the adjoint poses assembled directly from r, C_lm, C_bl, and r^{sz}_b.
template <int N>
GaussianPose<N> full_compound(const GaussianPose<N>& relative,
                              const ExtrinsicEstimate<N>& extrinsic,
                              const Pose<N>& t_ps,
                              const PoseCovariance<N>& sensor) {
  require_tags(relative.covariance, Datum::vehicle, Frame::vehicle, "full_compound");
  require_tags(extrinsic.covariance, Datum::sensor, Frame::sensor, "full_compound");
  require_tags(sensor, Datum::sensor, Frame::measurement, "full_compound");

  const double range = t_ps.translation().norm();
  VectorN<N> r_sp_m = VectorN<N>::Zero();
  r_sp_m(0) = -range;
  const MatrixN<N> c_ml = t_ps.rotation().matrix().transpose();
  const MatrixN<N> c_mb = c_ml * extrinsic.pose.rotation().matrix().transpose();
  const VectorN<N> r_zp_m = -c_mb * extrinsic.pose.translation() + r_sp_m;

  const Pose<N> t_zp_mb(Rotation<N>(c_mb), r_zp_m);
  const Pose<N> t_sp_ml(Rotation<N>(c_ml), r_sp_m);
  const Pose<N> t_sp_mm = Pose<N>::from_translation(r_sp_m);

  typename PoseCovariance<N>::Matrix gamma =
      congruence(t_zp_mb.adjoint(), relative.covariance.matrix) +
      congruence(t_sp_ml.adjoint(), extrinsic.covariance.matrix) +
      congruence(t_sp_mm.adjoint(), sensor.matrix);
  return {relative.mean * extrinsic.pose * t_ps, {gamma, Datum::point, Frame::measurement}};
}

// Position covariance of the measured point resolved in the central vehicle
// frame: C Gamma^{rho rho} C^T with C = C_{bc m}, the rotation of T_pzc.
template <int N>
Covariance<N> project_position(const PoseCovariance<N>& gamma, const Rotation<N>& c_bm) {
  require_tags(gamma, Datum::point, Frame::measurement, "project_position");
  const MatrixN<N> rho = gamma.matrix.template bottomRightCorner<N, N>();
  return {congruence(c_bm.matrix(), rho), Datum::point, Frame::central_vehicle};
}

inline Covariance<3> project_r3(const Covariance<6>& gamma, const Rotation3& c_bm) {
  return project_position<3>(gamma, c_bm);
}

// Jacobian of (r, a, e) -> r [cos e cos a, cos e sin a, sin e].
inline Eigen::Matrix3d spherical_jacobian(double r, double a, double e) {
  const double ca = std::cos(a), sa = std::sin(a), ce = std::cos(e), se = std::sin(e);
  Eigen::Matrix3d j;
  j << ce * ca, -r * ce * sa, -r * se * ca,
       ce * sa, r * ce * ca, -r * se * sa,
       se, 0.0, r * ce;
  return j;
}

// First-order Cartesian covariance J diag(s_r^2, s_a^2, s_e^2) J^T, resolved
// in the sensor frame. This is the Euclidean baseline the group model is
// compared against.
inline Covariance<3> linearized_r3_covariance(const RaeMeasurement& y, const SensorNoiseSpec& spec) {
  const Eigen::Matrix3d j = spherical_jacobian(y.range, y.azimuth, y.elevation);
  const Eigen::Vector3d var(spec.sigma_range * spec.sigma_range,
                            spec.sigma_azimuth * spec.sigma_azimuth,
                            spec.sigma_elevation * spec.sigma_elevation);
  return {congruence(j, Eigen::Matrix3d(var.asDiagonal())), Datum::point, Frame::sensor};
}

inline Covariance<2> linearized_r2_covariance(const RbMeasurement& y, const SensorNoiseSpec& spec) {
  const double c = std::cos(y.bearing), s = std::sin(y.bearing);
  Eigen::Matrix2d j;
  j << c, -y.range * s, s, y.range * c;
  const Eigen::Vector2d var(spec.sigma_range * spec.sigma_range,
                            spec.sigma_azimuth * spec.sigma_azimuth);
  return {congruence(j, Eigen::Matrix2d(var.asDiagonal())), Datum::point, Frame::sensor};
}

}  // namespace rae
