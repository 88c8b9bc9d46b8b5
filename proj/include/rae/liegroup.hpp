#pragma once

// Matrix Lie groups SO(2), SO(3), SE(2), SE(3).
//
// Conventions used throughout the library:
//  * tangent vectors are ordered rotation first, [theta; rho] on SE(2) and
//    [phi; rho] on SE(3);
//  * perturbations are right perturbations, T = T_bar * Exp(dxi);
//  * rotations are stored as direction cosine matrices.

#include <cmath>
#include <numbers>
#include <sstream>
#include <type_traits>

#include <Eigen/Dense>

#include "rae/errors.hpp"

namespace rae {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Below this angle the closed forms are replaced by their series expansions.
inline constexpr double kSmallAngle = 1e-8;
// log() refuses rotations within this distance of pi.
inline constexpr double kNearPiMargin = 1e-6;

// Number of tangent-space degrees of freedom of SE(N).
template <int N>
inline constexpr int kDof = (N == 2) ? 3 : 6;

template <int N>
using VectorN = Eigen::Matrix<double, N, 1>;
template <int N>
using MatrixN = Eigen::Matrix<double, N, N>;
template <int N>
using Tangent = Eigen::Matrix<double, kDof<N>, 1>;
template <int N>
using AdjointMatrix = Eigen::Matrix<double, kDof<N>, kDof<N>>;

using Twist2 = Tangent<2>;
using Twist3 = Tangent<3>;

// Angle wrapped into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

inline Eigen::Vector3d vee_so3(const Eigen::Matrix3d& m) {
  return {m(2, 1), m(0, 2), m(1, 0)};
}

// The 2D counterpart of skew(): Omega = [[0,-1],[1,0]].
inline Eigen::Matrix2d omega2() {
  Eigen::Matrix2d m;
  m << 0.0, -1.0, 1.0, 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// Rotation<N>

template <int N>
class Rotation {
  static_assert(N == 2 || N == 3, "only SO(2) and SO(3) are supported");

 public:
  using Matrix = MatrixN<N>;

  Rotation() : m_(Matrix::Identity()) {}

  // Wraps a matrix without checking it; see is_valid().
  explicit Rotation(const Matrix& m) : m_(m) {}

  static Rotation identity() { return Rotation(); }

  static Rotation from_angle(double theta)
    requires(N == 2)
  {
    const double c = std::cos(theta), s = std::sin(theta);
    Matrix m;
    m << c, -s, s, c;
    return Rotation(m);
  }

  double angle() const
    requires(N == 2)
  {
    return std::atan2(m_(1, 0), m_(0, 0));
  }

  const Matrix& matrix() const { return m_; }
  Matrix transpose_matrix() const { return m_.transpose(); }

  Rotation inverse() const { return Rotation(Matrix(m_.transpose())); }

  Rotation operator*(const Rotation& other) const {
    return Rotation(Matrix(m_ * other.m_));
  }
  VectorN<N> operator*(const VectorN<N>& v) const { return m_ * v; }

  // Projects onto the nearest orthonormal matrix (polar decomposition).
  Rotation normalized() const {
    Eigen::JacobiSVD<Matrix> svd(m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
      Matrix u = svd.matrixU();
      u.col(N - 1) *= -1.0;
      r = u * svd.matrixV().transpose();
    }
    return Rotation(r);
  }

  bool is_valid(double tol = 1e-9) const {
    return (m_.transpose() * m_ - Matrix::Identity()).norm() <= tol &&
           std::abs(m_.determinant() - 1.0) <= tol;
  }

 private:
  Matrix m_;
};

using Rotation2 = Rotation<2>;
using Rotation3 = Rotation<3>;

// ---------------------------------------------------------------------------
// SO(3) exponential, logarithm, and left Jacobian.

inline Rotation3 exp_so3(const Eigen::Vector3d& phi) {
  const double angle = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  if (angle < kSmallAngle) {
    return Rotation3(Eigen::Matrix3d(Eigen::Matrix3d::Identity() + k + 0.5 * k * k));
  }
  const double half_sin = std::sin(0.5 * angle);
  const double a = std::sin(angle) / angle;
  const double b = 2.0 * half_sin * half_sin / (angle * angle);
  return Rotation3(Eigen::Matrix3d(Eigen::Matrix3d::Identity() + a * k + b * k * k));
}

inline Eigen::Vector3d log_so3(const Rotation3& rot) {
  const Eigen::Matrix3d& c = rot.matrix();
  const Eigen::Vector3d w = 0.5 * vee_so3(c - c.transpose());
  const double sin_angle = w.norm();
  const double cos_angle = 0.5 * (c.trace() - 1.0);
  const double angle = std::atan2(sin_angle, cos_angle);
  if (angle > std::numbers::pi - kNearPiMargin) {
    std::ostringstream os;
    os << "log_so3: rotation angle " << angle << " rad is within "
       << kNearPiMargin << " of pi";
    throw AngleNearPi(os.str());
  }
  if (angle < kSmallAngle) {
    return (1.0 + angle * angle / 6.0) * w;
  }
  return (angle / sin_angle) * w;
}

// Left Jacobian of SO(3); the V-matrix of the SE(3) exponential.
inline Eigen::Matrix3d left_jacobian_so3(const Eigen::Vector3d& phi) {
  const double angle = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  if (angle < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + 0.5 * k + k * k / 6.0;
  }
  const double a2 = angle * angle;
  const double half_sin = std::sin(0.5 * angle);
  const double b = 2.0 * half_sin * half_sin / a2;
  const double c = (angle - std::sin(angle)) / (a2 * angle);
  return Eigen::Matrix3d::Identity() + b * k + c * k * k;
}

inline Eigen::Matrix3d left_jacobian_inverse_so3(const Eigen::Vector3d& phi) {
  const double angle = phi.norm();
  const Eigen::Matrix3d k = skew(phi);
  if (angle < kSmallAngle) {
    return Eigen::Matrix3d::Identity() - 0.5 * k + k * k / 12.0;
  }
  const double c = 1.0 / (angle * angle) -
                   (1.0 + std::cos(angle)) / (2.0 * angle * std::sin(angle));
  return Eigen::Matrix3d::Identity() - 0.5 * k + c * k * k;
}

// V-matrix of the SE(2) exponential: V = (sin t / t) I + ((1 - cos t) / t) Omega.
inline Eigen::Matrix2d v_matrix_se2(double theta) {
  double a, b;
  if (std::abs(theta) < kSmallAngle) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 * theta;
  } else {
    const double half_sin = std::sin(0.5 * theta);
    a = std::sin(theta) / theta;
    b = 2.0 * half_sin * half_sin / theta;
  }
  return a * Eigen::Matrix2d::Identity() + b * omega2();
}

// ---------------------------------------------------------------------------
// Pose<N>

template <int N>
class Pose {
  static_assert(N == 2 || N == 3, "only SE(2) and SE(3) are supported");

 public:
  static constexpr int kDim = N;
  using Vector = VectorN<N>;
  using Homogeneous = MatrixN<N + 1>;

  Pose() : rot_(), trans_(Vector::Zero()) {}
  Pose(const Rotation<N>& rot, const Vector& trans) : rot_(rot), trans_(trans) {}

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vector& t) { return Pose(Rotation<N>(), t); }

  const Rotation<N>& rotation() const { return rot_; }
  const Vector& translation() const { return trans_; }

  Homogeneous matrix() const {
    Homogeneous m = Homogeneous::Identity();
    m.template topLeftCorner<N, N>() = rot_.matrix();
    m.template topRightCorner<N, 1>() = trans_;
    return m;
  }

  Pose operator*(const Pose& other) const {
    return Pose(rot_ * other.rot_, rot_ * other.trans_ + trans_);
  }

  // Group action on a point.
  Vector operator*(const Vector& p) const { return rot_ * p + trans_; }

  Pose inverse() const {
    const Rotation<N> inv = rot_.inverse();
    return Pose(inv, -(inv * trans_));
  }

  Pose normalized() const { return Pose(rot_.normalized(), trans_); }

  static Pose exp(const Tangent<N>& xi);
  Tangent<N> log() const;

  // Adjoint matrix, Adj(T) xi = (T xi^ T^-1)^v.
  AdjointMatrix<N> adjoint() const;

 private:
  Rotation<N> rot_;
  Vector trans_;
};

using Pose2 = Pose<2>;
using Pose3 = Pose<3>;

inline Pose2 exp_se2(const Twist2& xi) {
  const double theta = xi(0);
  return Pose2(Rotation2::from_angle(theta), v_matrix_se2(theta) * xi.tail<2>());
}

inline Twist2 log_se2(const Pose2& pose) {
  const double theta = pose.rotation().angle();
  if (std::abs(theta) > std::numbers::pi - kNearPiMargin) {
    std::ostringstream os;
    os << "log_se2: rotation angle " << theta << " rad is within "
       << kNearPiMargin << " of pi";
    throw AngleNearPi(os.str());
  }
  Twist2 xi;
  xi(0) = theta;
  xi.tail<2>() = v_matrix_se2(theta).inverse() * pose.translation();
  return xi;
}

inline Pose3 exp_se3(const Twist3& xi) {
  const Eigen::Vector3d phi = xi.head<3>();
  return Pose3(exp_so3(phi), left_jacobian_so3(phi) * xi.tail<3>());
}

inline Twist3 log_se3(const Pose3& pose) {
  const Eigen::Vector3d phi = log_so3(pose.rotation());
  Twist3 xi;
  xi.head<3>() = phi;
  xi.tail<3>() = left_jacobian_inverse_so3(phi) * pose.translation();
  return xi;
}

// Adj(T) = [[1, 0], [-Omega r, C]].
inline Eigen::Matrix3d adjoint_se2(const Pose2& pose) {
  Eigen::Matrix3d adj = Eigen::Matrix3d::Zero();
  adj(0, 0) = 1.0;
  adj.block<2, 1>(1, 0) = -omega2() * pose.translation();
  adj.block<2, 2>(1, 1) = pose.rotation().matrix();
  return adj;
}

// Adj(T) = [[C, 0], [r^x C, C]].
inline Matrix6d adjoint_se3(const Pose3& pose) {
  const Eigen::Matrix3d& c = pose.rotation().matrix();
  Matrix6d adj = Matrix6d::Zero();
  adj.topLeftCorner<3, 3>() = c;
  adj.bottomLeftCorner<3, 3>() = skew(pose.translation()) * c;
  adj.bottomRightCorner<3, 3>() = c;
  return adj;
}

template <int N>
Pose<N> Pose<N>::exp(const Tangent<N>& xi) {
  if constexpr (N == 2) {
    return exp_se2(xi);
  } else {
    return exp_se3(xi);
  }
}

template <int N>
Tangent<N> Pose<N>::log() const {
  if constexpr (N == 2) {
    return log_se2(*this);
  } else {
    return log_se3(*this);
  }
}

template <int N>
AdjointMatrix<N> Pose<N>::adjoint() const {
  if constexpr (N == 2) {
    return adjoint_se2(*this);
  } else {
    return adjoint_se3(*this);
  }
}

template <int N>
Pose<N> compose(const Pose<N>& a, const Pose<N>& b) {
  return a * b;
}

template <int N>
Pose<N> inverse(const Pose<N>& t) {
  return t.inverse();
}

// Hat operator into the Lie algebra (homogeneous matrix form).
inline Eigen::Matrix3d hat_se2(const Twist2& xi) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m.topLeftCorner<2, 2>() = xi(0) * omega2();
  m.topRightCorner<2, 1>() = xi.tail<2>();
  return m;
}

inline Eigen::Matrix4d hat_se3(const Twist3& xi) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.head<3>());
  m.topRightCorner<3, 1>() = xi.tail<3>();
  return m;
}

inline Twist2 vee_se2(const Eigen::Matrix3d& m) {
  return {m(1, 0), m(0, 2), m(1, 2)};
}

inline Twist3 vee_se3(const Eigen::Matrix4d& m) {
  Twist3 xi;
  xi.head<3>() = vee_so3(m.topLeftCorner<3, 3>());
  xi.tail<3>() = m.topRightCorner<3, 1>();
  return xi;
}

// Little adjoint, ad(a) b = (a^ b^ - b^ a^)^v.
inline Eigen::Matrix3d ad_se2(const Twist2& xi) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m.block<2, 1>(1, 0) = -omega2() * xi.tail<2>();
  m.block<2, 2>(1, 1) = xi(0) * omega2();
  return m;
}

inline Matrix6d ad_se3(const Twist3& xi) {
  Matrix6d m = Matrix6d::Zero();
  const Eigen::Matrix3d phi = skew(xi.head<3>());
  m.topLeftCorner<3, 3>() = phi;
  m.bottomLeftCorner<3, 3>() = skew(xi.tail<3>());
  m.bottomRightCorner<3, 3>() = phi;
  return m;
}

template <int N>
AdjointMatrix<N> little_adjoint(const Tangent<N>& xi) {
  if constexpr (N == 2) {
    return ad_se2(xi);
  } else {
    return ad_se3(xi);
  }
}

}  // namespace rae
