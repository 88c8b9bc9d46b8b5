#pragma once

#include <algorithm>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "rae/errors.hpp"
#include "rae/liegroup.hpp"

namespace rae {

// Datum (point) a perturbation is taken about.
enum class Datum { unspecified, world, vehicle, sensor, point };

// Reference frame a perturbation is resolved in. `central_vehicle` is the
// vehicle frame at the central submap pose.
enum class Frame { unspecified, world, vehicle, central_vehicle, sensor, measurement };

inline std::string_view to_string(Datum d) {
  switch (d) {
    case Datum::world: return "world";
    case Datum::vehicle: return "vehicle";
    case Datum::sensor: return "sensor";
    case Datum::point: return "point";
    default: return "unspecified";
  }
}

inline std::string_view to_string(Frame f) {
  switch (f) {
    case Frame::world: return "world";
    case Frame::vehicle: return "vehicle";
    case Frame::central_vehicle: return "central_vehicle";
    case Frame::sensor: return "sensor";
    case Frame::measurement: return "measurement";
    default: return "unspecified";
  }
}

// Covariance of a tangent-space perturbation, annotated with the datum the
// perturbation is about and the frame it is resolved in.
template <int D>
struct Covariance {
  using Matrix = Eigen::Matrix<double, D, D>;

  Matrix matrix = Matrix::Zero();
  Datum point = Datum::unspecified;
  Frame frame = Frame::unspecified;

  static Covariance zero(Datum p, Frame f) { return {Matrix::Zero(), p, f}; }

  double trace() const { return matrix.trace(); }
};

template <int N>
using PoseCovariance = Covariance<kDof<N>>;

// Mean group element plus the covariance of a right perturbation about it.
template <int N>
struct GaussianPose {
  Pose<N> mean;
  PoseCovariance<N> covariance;
};

template <int D>
void require_tags(const Covariance<D>& c, Datum point, Frame frame, std::string_view what) {
  if (c.point != point || c.frame != frame) {
    std::string msg(what);
    msg += ": expected covariance about '";
    msg += to_string(point);
    msg += "' in frame '";
    msg += to_string(frame);
    msg += "', got '";
    msg += to_string(c.point);
    msg += "' in '";
    msg += to_string(c.frame);
    msg += "'";
    throw TagMismatch(msg);
  }
}

template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return 0.5 * (m + m.transpose());
}

// A * S * A^T, symmetrized.
template <typename DA, typename DS>
auto congruence(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DS>& s) {
  using Result = Eigen::Matrix<double, DA::RowsAtCompileTime, DA::RowsAtCompileTime>;
  Result r = a * s * a.transpose();
  return Result(0.5 * (r + r.transpose()));
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(symmetrized(m));
  return es.eigenvalues().minCoeff();
}

// Numerically PSD: symmetric, min eigenvalue >= -tol * max |eigenvalue|.
template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
  const auto& a = m.derived();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(a);
  const auto& ev = es.eigenvalues();
  return ev.minCoeff() >= -tol * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
}

// Row-major upper triangle, D*(D+1)/2 values.
template <int D>
Eigen::Matrix<double, D*(D + 1) / 2, 1> upper_triangle(const Eigen::Matrix<double, D, D>& m) {
  Eigen::Matrix<double, D*(D + 1) / 2, 1> v;
  int k = 0;
  for (int i = 0; i < D; ++i)
    for (int j = i; j < D; ++j) v(k++) = m(i, j);
  return v;
}

template <int D>
Eigen::Matrix<double, D, D> from_upper_triangle(const Eigen::Matrix<double, D*(D + 1) / 2, 1>& v) {
  Eigen::Matrix<double, D, D> m;
  int k = 0;
  for (int i = 0; i < D; ++i)
    for (int j = i; j < D; ++j) m(i, j) = m(j, i) = v(k++);
  return m;
}

}  // namespace rae
