#pragma once

// Open-loop odometry uncertainty between the central submap pose and each
// measurement pose.
//
// The SE(2) model uses a gyro and a forward-velocity wheel encoder; the SE(3)
// model is a white-noise-on-acceleration (WNOA) prior over pose and
// generalized velocity. Both use the error kinematics
//   d/dt dx = A dx + L dw,   A = -ad(u_bar) (+ velocity coupling for WNOA),
// discretized over each sampling interval with A held at the step's nominal
// input.
//
// The SE(2) error here is the left-invariant error T_bar^-1 T, which is the
// same quantity as the right perturbation T = T_bar Exp(dxi) used by the
// rest of the library, so the chained covariance needs no conversion.

#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "rae/covariance.hpp"
#include "rae/errors.hpp"
#include "rae/liegroup.hpp"
#include "rae/numerics.hpp"

namespace rae {

struct Se2Psd {
  double gyro = 1e-4;   // rad^2/s
  double wheel = 1e-4;  // m^2/s
};

struct WnoaPsd {
  double rotational = 9e-6;     // rad^2/s^3
  double translational = 1e-8;  // m^2/s^3
};

template <int N>
struct TrajectorySample {
  double time = 0.0;
  Pose<N> pose;
  // Body-frame generalized velocity [omega; nu]. For SE(2) this is
  // [gyro rate; forward speed; 0].
  std::optional<Tangent<N>> velocity;
};

template <int S, int W>
struct ErrorJacobians {
  Eigen::Matrix<double, S, S> a;
  Eigen::Matrix<double, S, W> l;
};

// A = -ad(u_bar); L routes gyro noise to heading and wheel noise to forward
// position.
inline ErrorJacobians<3, 2> error_jacobians_se2(const Twist2& u_bar) {
  ErrorJacobians<3, 2> j;
  j.a = -ad_se2(u_bar);
  j.l.setZero();
  j.l(0, 0) = 1.0;
  j.l(1, 1) = 1.0;
  return j;
}

// A = [[-ad(varpi_bar), -I], [0, 0]], L = [0; I].
inline ErrorJacobians<12, 6> error_jacobians_wnoa(const Vector6d& varpi_bar) {
  ErrorJacobians<12, 6> j;
  j.a.setZero();
  j.a.topLeftCorner<6, 6>() = -ad_se3(varpi_bar);
  j.a.topRightCorner<6, 6>() = -Matrix6d::Identity();
  j.l.setZero();
  j.l.bottomRows<6>().setIdentity();
  return j;
}

inline constexpr int kDefaultQuadratureNodes = 10;

// Q_k = int_0^dt Phi(t) L Q L^T Phi(t)^T dt with Phi(t) = exp(A t), by
// Gauss-Legendre quadrature.
template <int S, int W>
Eigen::Matrix<double, S, S> discrete_process_noise(const Eigen::Matrix<double, S, S>& a,
                                                   const Eigen::Matrix<double, S, W>& l,
                                                   const Eigen::Matrix<double, W, W>& q,
                                                   double dt,
                                                   int nodes = kDefaultQuadratureNodes) {
  if (!(dt > 0.0)) {
    std::ostringstream os;
    os << "discrete_process_noise: dt must be positive, got " << dt;
    throw NonPositiveDt(os.str());
  }
  const QuadratureRule rule = gauss_legendre(nodes);
  const Eigen::Matrix<double, S, S> lql = l * q * l.transpose();
  Eigen::Matrix<double, S, S> qk = Eigen::Matrix<double, S, S>::Zero();
  for (int i = 0; i < nodes; ++i) {
    const double t = 0.5 * dt * (rule.nodes[i] + 1.0);
    const Eigen::Matrix<double, S, S> phi = matrix_exponential(Eigen::Matrix<double, S, S>(a * t));
    qk += (0.5 * dt * rule.weights[i]) * (phi * lql * phi.transpose());
  }
  return symmetrized(qk);
}

// Transition and process noise of one sampling interval.
template <int D>
struct StepModel {
  Eigen::Matrix<double, D, D> transition;
  Eigen::Matrix<double, D, D> noise;
};

// Nominal body velocity over [a, b]: mean of the sampled velocities when
// both are present, otherwise Log(T_a^-1 T_b) / dt.
template <int N>
Tangent<N> nominal_step_velocity(const TrajectorySample<N>& a, const TrajectorySample<N>& b) {
  if (a.velocity && b.velocity) return 0.5 * (*a.velocity + *b.velocity);
  const double dt = b.time - a.time;
  if (!(dt > 0.0)) {
    std::ostringstream os;
    os << "trajectory timestamps must be strictly increasing (" << a.time << " -> " << b.time << ")";
    throw NonPositiveDt(os.str());
  }
  return (a.pose.inverse() * b.pose).log() / dt;
}

inline StepModel<3> se2_step(const TrajectorySample<2>& a, const TrajectorySample<2>& b,
                             const Se2Psd& psd, int nodes = kDefaultQuadratureNodes) {
  const double dt = b.time - a.time;
  const auto j = error_jacobians_se2(nominal_step_velocity(a, b));
  const Eigen::Vector2d q_diag(psd.gyro, psd.wheel);
  const Eigen::Matrix2d q = q_diag.asDiagonal();
  StepModel<3> s;
  s.noise = discrete_process_noise<3, 2>(j.a, j.l, q, dt, nodes);
  s.transition = matrix_exponential(Eigen::Matrix3d(j.a * dt));
  return s;
}

inline StepModel<12> wnoa_step(const TrajectorySample<3>& a, const TrajectorySample<3>& b,
                               const WnoaPsd& psd, int nodes = kDefaultQuadratureNodes) {
  const double dt = b.time - a.time;
  const auto j = error_jacobians_wnoa(nominal_step_velocity(a, b));
  Eigen::Matrix<double, 6, 6> q = Eigen::Matrix<double, 6, 6>::Zero();
  q.diagonal().head<3>().setConstant(psd.rotational);
  q.diagonal().tail<3>().setConstant(psd.translational);
  StepModel<12> s;
  s.noise = discrete_process_noise<12, 6>(j.a, j.l, q, dt, nodes);
  s.transition = matrix_exponential(Eigen::Matrix<double, 12, 12>(j.a * dt));
  return s;
}

template <int D>
struct ChainResult {
  Eigen::Matrix<double, D, D> covariance;
  // Linear map from the error at `from` to the error at `to`.
  Eigen::Matrix<double, D, D> transition;
};

namespace detail {

template <int N>
void check_indices(std::span<const TrajectorySample<N>> traj, std::size_t from, std::size_t to) {
  if (from >= traj.size() || to >= traj.size()) {
    std::ostringstream os;
    os << "trajectory index out of range (from " << from << ", to " << to << ", size "
       << traj.size() << ")";
    throw IndexOutOfRange(os.str());
  }
}

template <int N, int D, typename StepFn>
ChainResult<D> chain(std::span<const TrajectorySample<N>> traj, std::size_t from, std::size_t to,
                     const Eigen::Matrix<double, D, D>& initial, StepFn&& step) {
  check_indices(traj, from, to);
  using Matrix = Eigen::Matrix<double, D, D>;
  ChainResult<D> out{initial, Matrix::Identity()};
  if (to > from) {
    for (std::size_t j = from; j < to; ++j) {
      const StepModel<D> s = step(traj[j], traj[j + 1]);
      out.covariance = congruence(s.transition, out.covariance) + s.noise;
      out.transition = s.transition * out.transition;
    }
  } else {
    // Backward: x_{j-1} = Phi^-1 (x_j - w_j).
    for (std::size_t j = from; j > to; --j) {
      const StepModel<D> s = step(traj[j - 1], traj[j]);
      const Matrix inv = s.transition.inverse();
      out.covariance = congruence(inv, Matrix(out.covariance + s.noise));
      out.transition = inv * out.transition;
    }
  }
  return out;
}

}  // namespace detail

// Chains per-step process noise from index `from` to index `to`, starting
// from `initial` at `from`.
inline ChainResult<3> chain_uncertainty(std::span<const TrajectorySample<2>> traj, const Se2Psd& psd,
                                        std::size_t from, std::size_t to,
                                        const Eigen::Matrix3d& initial = Eigen::Matrix3d::Zero()) {
  return detail::chain<2, 3>(traj, from, to, initial,
                             [&](const auto& a, const auto& b) { return se2_step(a, b, psd); });
}

inline ChainResult<12> chain_uncertainty(std::span<const TrajectorySample<3>> traj, const WnoaPsd& psd,
                                         std::size_t from, std::size_t to,
                                         const Eigen::Matrix<double, 12, 12>& initial =
                                             Eigen::Matrix<double, 12, 12>::Zero()) {
  return detail::chain<3, 12>(traj, from, to, initial,
                              [&](const auto& a, const auto& b) { return wnoa_step(a, b, psd); });
}

// Sigma^z_b: covariance of the relative pose T_{zc}^-1 T_z between the
// central sample and the target sample.
inline Covariance<3> accumulate_relative_uncertainty(std::span<const TrajectorySample<2>> traj,
                                                     const Se2Psd& psd, std::size_t central,
                                                     std::size_t target) {
  return {chain_uncertainty(traj, psd, central, target).covariance, Datum::vehicle, Frame::vehicle};
}

// Joint [pose; velocity] covariance of the WNOA chain.
inline Covariance<12> accumulate_wnoa_joint(std::span<const TrajectorySample<3>> traj,
                                            const WnoaPsd& psd, std::size_t central,
                                            std::size_t target) {
  return {chain_uncertainty(traj, psd, central, target).covariance, Datum::vehicle, Frame::vehicle};
}

inline Covariance<6> accumulate_relative_uncertainty(std::span<const TrajectorySample<3>> traj,
                                                     const WnoaPsd& psd, std::size_t central,
                                                     std::size_t target) {
  const Covariance<12> joint = accumulate_wnoa_joint(traj, psd, central, target);
  return {joint.matrix.topLeftCorner<6, 6>(), Datum::vehicle, Frame::vehicle};
}

// Sigma^z_b for every sample, by one forward and one backward sweep from the
// central sample.
template <int N, typename Psd>
std::vector<PoseCovariance<N>> relative_uncertainty_all(std::span<const TrajectorySample<N>> traj,
                                                        const Psd& psd, std::size_t central) {
  constexpr int D = (N == 2) ? 3 : 12;
  using Matrix = Eigen::Matrix<double, D, D>;
  detail::check_indices(traj, central, central);
  std::vector<PoseCovariance<N>> out(traj.size(), PoseCovariance<N>::zero(Datum::vehicle, Frame::vehicle));
  auto store = [&](std::size_t k, const Matrix& m) {
    out[k].matrix = m.template topLeftCorner<kDof<N>, kDof<N>>();
  };
  Matrix cov = Matrix::Zero();
  for (std::size_t k = central; k + 1 < traj.size(); ++k) {
    cov = chain_uncertainty(traj, psd, k, k + 1, cov).covariance;
    store(k + 1, cov);
  }
  cov.setZero();
  for (std::size_t k = central; k > 0; --k) {
    cov = chain_uncertainty(traj, psd, k, k - 1, cov).covariance;
    store(k - 1, cov);
  }
  return out;
}

// Relative pose T^{z zc}_{bc b} = T_central^-1 T_target with its covariance.
template <int N, typename Psd>
GaussianPose<N> relative_pose(std::span<const TrajectorySample<N>> traj, const Psd& psd,
                              std::size_t central, std::size_t target) {
  return {traj[central].pose.inverse() * traj[target].pose,
          accumulate_relative_uncertainty(traj, psd, central, target)};
}

}  // namespace rae
