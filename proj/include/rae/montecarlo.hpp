#pragma once

// Sampling oracles for the analytic covariances: exact composition of the
// compound model, tangent-space statistics about the analytic mean, and
// position coverage of the group model against the linearized Cartesian one.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "rae/compounding.hpp"
#include "rae/covariance.hpp"
#include "rae/errors.hpp"
#include "rae/frame.hpp"
#include "rae/liegroup.hpp"
#include "rae/numerics.hpp"
#include "rae/parallel.hpp"
#include "rae/random.hpp"

namespace rae {

inline constexpr double kCoverageThreshold = 9.0;  // Mahalanobis 3, squared

template <int N>
struct CompoundInputs {
  GaussianPose<N> relative;       // T^{z zc}, Sigma^z_b
  ExtrinsicEstimate<N> extrinsic; // T^{sz}, Sigma^s_l
  Pose<N> measurement;            // T^{ps}
  PoseCovariance<N> sensor;       // Sigma^s_m

  GaussianPose<N> analytic() const { return full_compound(relative, extrinsic, measurement, sensor); }
};

// T_zzc Exp(dz) T_sz Exp(dl) T_ps Exp(dp), where the sensor draw dm ~ Sigma^s_m
// is carried to the point by dp = Adj(T^{sp}_{mm}) dm. That is the same
// random pose as perturbing the sensor datum of T_ps by dm, written as a
// right perturbation of T_ps. Sample i uses stream i.
template <int N>
std::vector<Pose<N>> sample_compound(const CompoundInputs<N>& in, std::size_t n, std::uint64_t seed,
                                     unsigned threads = 1) {
  if (n < 1) throw ValidationError("sample_compound: need at least one sample");
  constexpr int D = kDof<N>;
  const GaussianSampler<D> dz(in.relative.covariance.matrix);
  const GaussianSampler<D> dl(in.extrinsic.covariance.matrix);
  const GaussianSampler<D> dm(in.sensor.matrix);
  const AdjointMatrix<N> to_point =
      sensor_from_point_offset<N>(in.measurement.translation().norm()).adjoint();
  std::vector<Pose<N>> out(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(seed, i);
      const Tangent<N> z = dz(rng);
      const Tangent<N> l = dl(rng);
      const Tangent<N> m = dm(rng);
      out[i] = in.relative.mean * Pose<N>::exp(z) * in.extrinsic.pose * Pose<N>::exp(l) *
               in.measurement * Pose<N>::exp(Tangent<N>(to_point * m));
    }
  });
  return out;
}

template <int N>
std::vector<Tangent<N>> tangent_errors(std::span<const Pose<N>> samples, const Pose<N>& mean) {
  const Pose<N> inv = mean.inverse();
  std::vector<Tangent<N>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back((inv * s).log());
  return out;
}

// Unbiased sample covariance of Log(mean^-1 T_i).
template <int N>
PoseCovariance<N> empirical_tangent_covariance(std::span<const Pose<N>> samples, const Pose<N>& mean,
                                               Datum point = Datum::point,
                                               Frame frame = Frame::measurement) {
  if (samples.size() < 2) throw ValidationError("empirical_tangent_covariance: need at least two samples");
  constexpr int D = kDof<N>;
  const std::vector<Tangent<N>> err = tangent_errors<N>(samples, mean);
  Tangent<N> mu = Tangent<N>::Zero();
  for (const auto& e : err) mu += e;
  mu /= static_cast<double>(err.size());
  Eigen::Matrix<double, D, D> acc = Eigen::Matrix<double, D, D>::Zero();
  for (const auto& e : err) acc.noalias() += (e - mu) * (e - mu).transpose();
  return {symmetrized(Eigen::Matrix<double, D, D>(acc / static_cast<double>(err.size() - 1))), point, frame};
}

struct ConsistencyReport {
  std::size_t samples = 0;
  int dof = 0;
  double anees = 0.0;          // mean NEES divided by dof
  double anees_lower = 0.0;    // 95% interval for ANEES/dof under consistency
  double anees_upper = 0.0;
  double coverage = 0.0;       // fraction with NEES <= threshold
  double expected_coverage = 0.0;
  double threshold = kCoverageThreshold;
  double frobenius_error = 0.0;  // |S_emp - S| / |S|, or NaN when not computed

  bool anees_within(double lo, double hi) const { return anees >= lo && anees <= hi; }
  double coverage_gap() const { return coverage - expected_coverage; }
};

namespace detail {

template <int D>
Eigen::LLT<Eigen::Matrix<double, D, D>> checked_llt(const Eigen::Matrix<double, D, D>& cov,
                                                    const char* what) {
  Eigen::LLT<Eigen::Matrix<double, D, D>> llt(symmetrized(cov));
  if (llt.info() != Eigen::Success || !(min_eigenvalue(cov) > 0.0)) {
    throw SingularCovariance(std::string(what) + ": analytic covariance is not positive definite");
  }
  return llt;
}

inline void finish_report(ConsistencyReport& r, double nees_sum, std::size_t inside) {
  const double n = static_cast<double>(r.samples);
  r.anees = nees_sum / (n * r.dof);
  // n * dof * ANEES ~ chi2(n dof); normal approximation of its 95% band.
  const double half = 1.959963984540054 * std::sqrt(2.0 / (n * r.dof));
  r.anees_lower = 1.0 - half;
  r.anees_upper = 1.0 + half;
  r.coverage = static_cast<double>(inside) / n;
  r.expected_coverage = chi_square_cdf(r.threshold, r.dof);
}

}  // namespace detail

// ANEES and coverage of zero-mean error vectors against one covariance.
template <int D>
ConsistencyReport consistency_from_errors(std::span<const Eigen::Matrix<double, D, 1>> errors,
                                          const Eigen::Matrix<double, D, D>& cov,
                                          double threshold = kCoverageThreshold) {
  if (errors.empty()) throw ValidationError("consistency report: no samples");
  const auto llt = detail::checked_llt<D>(cov, "consistency report");
  ConsistencyReport r;
  r.samples = errors.size();
  r.dof = D;
  r.threshold = threshold;
  double sum = 0.0;
  std::size_t inside = 0;
  for (const auto& e : errors) {
    const double nees = e.dot(llt.solve(e));
    sum += nees;
    if (nees <= threshold) ++inside;
  }
  detail::finish_report(r, sum, inside);
  r.frobenius_error = std::nan("");
  return r;
}

template <int N>
ConsistencyReport consistency_report(std::span<const Pose<N>> samples, const GaussianPose<N>& analytic,
                                     double threshold = kCoverageThreshold) {
  const std::vector<Tangent<N>> err = tangent_errors<N>(samples, analytic.mean);
  ConsistencyReport r = consistency_from_errors<kDof<N>>(err, analytic.covariance.matrix, threshold);
  if (samples.size() >= 2) {
    const auto emp = empirical_tangent_covariance<N>(samples, analytic.mean);
    r.frobenius_error = (emp.matrix - analytic.covariance.matrix).norm() / analytic.covariance.matrix.norm();
  }
  return r;
}

// Smallest tangent-space Mahalanobis distance (squared) over all twists xi
// with position(T_bar Exp(xi)) = x. Minimum-norm Gauss-Newton on the
// position constraint; converges in a few steps for banana-sized errors.
template <int N>
double position_mahalanobis(const GaussianPose<N>& g, const VectorN<N>& x, int max_iter = 30) {
  constexpr int D = kDof<N>;
  using Jac = Eigen::Matrix<double, N, D>;
  const auto& cov = g.covariance.matrix;
  auto position = [&](const Tangent<N>& xi) { return (g.mean * Pose<N>::exp(xi)).translation(); };
  auto jacobian = [&](const Tangent<N>& xi) {
    Jac j;
    for (int c = 0; c < D; ++c) {
      const double h = 1e-6 * std::max(1.0, std::abs(xi(c)));
      Tangent<N> p = xi, m = xi;
      p(c) += h;
      m(c) -= h;
      j.col(c) = (position(p) - position(m)) / (2.0 * h);
    }
    return j;
  };
  Tangent<N> xi = Tangent<N>::Zero();
  Jac j = Jac::Zero();
  j.template rightCols<N>() = g.mean.rotation().matrix();
  double m2 = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const VectorN<N> b = x - position(xi) + j * xi;
    const MatrixN<N> s = j * cov * j.transpose();
    const Eigen::LDLT<MatrixN<N>> ldlt(s);
    const VectorN<N> lambda = ldlt.solve(b);
    const Tangent<N> next = cov * j.transpose() * lambda;
    m2 = b.dot(lambda);
    const double step = (next - xi).norm();
    xi = next;
    if (step <= 1e-13 * std::max(1.0, xi.norm())) break;
    j = jacobian(xi);
  }
  return m2;
}

// Exact spherical noise on one (r, a, e) measurement, scored by the group
// model, its Cartesian projection, and the first-order Cartesian model.
struct CoverageConfig {
  RaeMeasurement measurement{10.0, 0.0, 0.0, 0.0};
  SensorNoiseSpec noise{1e-2, 5.0 * 3.14159265358979323846 / 180.0, 0.1 * 3.14159265358979323846 / 180.0, 1e-5};
  SlotOrder slot_order = SlotOrder::perpendicular_axes;
  double threshold = kCoverageThreshold;
};

struct CoverageComparison {
  ConsistencyReport group;      // tangent preimage distance, group model
  ConsistencyReport projected;  // ellipsoid C Gamma_rr C^T
  ConsistencyReport linearized; // J diag(s^2) J^T
};

inline CoverageComparison coverage_comparison(const CoverageConfig& cfg, std::size_t n, std::uint64_t seed,
                                              unsigned threads = 1) {
  if (n < 1) throw ValidationError("coverage_comparison: need at least one sample");
  const RaeMeasurement& y = cfg.measurement;
  const Pose3 mean = rae_to_pose3(y);
  const GaussianPose<3> g{mean, propagate_to_point<3>(y.range, sensor_covariance_3d(cfg.noise, cfg.slot_order))};
  const Eigen::Matrix3d projected = project_r3(g.covariance, mean.rotation()).matrix;
  const Eigen::Matrix3d linear = linearized_r3_covariance(y, cfg.noise).matrix;
  const auto llt_proj = detail::checked_llt<3>(projected, "coverage_comparison");
  const auto llt_lin = detail::checked_llt<3>(linear, "coverage_comparison");

  std::vector<double> nees_group(n), nees_proj(n), nees_lin(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(seed, i);
      const double r = y.range + cfg.noise.sigma_range * rng.normal();
      const double a = y.azimuth + cfg.noise.sigma_azimuth * rng.normal();
      const double e = y.elevation + cfg.noise.sigma_elevation * rng.normal();
      const Eigen::Vector3d x = r * Eigen::Vector3d(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a),
                                                    std::sin(e));
      const Eigen::Vector3d d = x - mean.translation();
      nees_group[i] = position_mahalanobis<3>(g, x);
      nees_proj[i] = d.dot(llt_proj.solve(d));
      nees_lin[i] = d.dot(llt_lin.solve(d));
    }
  });

  auto summarize = [&](const std::vector<double>& nees) {
    ConsistencyReport r;
    r.samples = n;
    r.dof = 3;
    r.threshold = cfg.threshold;
    double sum = 0.0;
    std::size_t inside = 0;
    for (double v : nees) {
      sum += v;
      if (v <= cfg.threshold) ++inside;
    }
    detail::finish_report(r, sum, inside);
    r.frobenius_error = std::nan("");
    return r;
  };
  return {summarize(nees_group), summarize(nees_proj), summarize(nees_lin)};
}

}  // namespace rae
