#pragma once

// Confidence-envelope geometry. Boundary twists lie on the tangent ellipsoid
// xi^T Sigma^-1 xi = level^2 restricted to the twists that move the point's
// position; each is pushed through T_bar Exp(xi) and the position kept.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rae/covariance.hpp"
#include "rae/errors.hpp"
#include "rae/liegroup.hpp"

namespace rae {

struct EnvelopeGeometry {
  int dimension = 2;
  double level = 3.0;
  std::vector<Eigen::Vector3d> vertices;          // z = 0 in 2D
  std::vector<std::array<int, 3>> triangles;      // empty in 2D; loop is implicit
  std::vector<Eigen::VectorXd> boundary_twists;   // one per vertex
  // Image of the tangent segment s * level * B u_major, s in [-1, 1]: the
  // positions swept along the longest axis of the position ellipsoid.
  std::vector<Eigen::Vector3d> spine;
};

namespace detail {

// Columns span the boundary: xi(u) = level * B u for unit u. B = S[:, rho]
// (S_rr)^{-1/2}, the conditional-on-position tangent directions, so the
// boundary twists are the minimum-Mahalanobis preimages of the position
// ellipsoid and axes that never move the position drop out.
template <int N>
Eigen::Matrix<double, kDof<N>, N> boundary_basis(const PoseCovariance<N>& cov) {
  constexpr int D = kDof<N>;
  const MatrixN<N> rr = cov.matrix.template bottomRightCorner<N, N>();
  Eigen::SelfAdjointEigenSolver<MatrixN<N>> es(symmetrized(rr));
  const auto& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-14 * std::max(ev.maxCoeff(), 0.0)) || !(ev.maxCoeff() > 0.0)) {
    std::ostringstream os;
    os << "envelope: position block has rank < " << N;
    throw SingularCovariance(os.str());
  }
  const MatrixN<N> inv_sqrt = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                              es.eigenvectors().transpose();
  return Eigen::Matrix<double, D, N>(cov.matrix.template rightCols<N>() * inv_sqrt);
}

// Unit u along the major axis of the linearized position ellipsoid.
template <int N>
VectorN<N> major_direction(const PoseCovariance<N>& cov) {
  const MatrixN<N> rr = cov.matrix.template bottomRightCorner<N, N>();
  Eigen::SelfAdjointEigenSolver<MatrixN<N>> es(symmetrized(rr));
  VectorN<N> u = es.eigenvectors().col(N - 1);
  // Deterministic sign.
  int big = 0;
  for (int i = 1; i < N; ++i)
    if (std::abs(u(i)) > std::abs(u(big))) big = i;
  return u(big) < 0.0 ? VectorN<N>(-u) : u;
}

template <int N>
std::vector<Eigen::Vector3d> spine(const GaussianPose<N>& g, const Eigen::Matrix<double, kDof<N>, N>& basis,
                                   double level, int samples = 33) {
  const VectorN<N> u = major_direction<N>(g.covariance);
  std::vector<Eigen::Vector3d> out;
  for (int i = 0; i < samples; ++i) {
    const double s = -1.0 + 2.0 * i / (samples - 1);
    const Tangent<N> xi = s * level * basis * u;
    const VectorN<N> p = (g.mean * Pose<N>::exp(xi)).translation();
    Eigen::Vector3d q = Eigen::Vector3d::Zero();
    q.head<N>() = p;
    out.push_back(q);
  }
  return out;
}

inline void check_level(double level) {
  if (!(level > 0.0) || !std::isfinite(level)) throw ValidationError("envelope: level must be positive");
}

}  // namespace detail

inline Eigen::Vector3d lift(const Eigen::Vector2d& p) { return {p.x(), p.y(), 0.0}; }
inline Eigen::Vector3d lift(const Eigen::Vector3d& p) { return p; }

inline EnvelopeGeometry envelope_2d(const GaussianPose<2>& g, double level, int resolution) {
  detail::check_level(level);
  if (resolution < 16) throw ValidationError("envelope_2d: resolution must be at least 16");
  const Eigen::Matrix<double, 3, 2> basis = detail::boundary_basis<2>(g.covariance);
  EnvelopeGeometry out;
  out.dimension = 2;
  out.level = level;
  for (int i = 0; i < resolution; ++i) {
    const double t = 2.0 * std::numbers::pi * i / resolution;
    const Twist2 xi = level * basis * Eigen::Vector2d(std::cos(t), std::sin(t));
    out.vertices.push_back(lift((g.mean * exp_se2(xi)).translation()));
    out.boundary_twists.emplace_back(xi);
  }
  out.spine = detail::spine<2>(g, basis, level);
  return out;
}

// Latitude-longitude sphere: `resolution` longitudes, resolution / 2
// latitude bands, one vertex at each pole. Triangles wind outward.
inline EnvelopeGeometry envelope_3d(const GaussianPose<3>& g, double level, int resolution) {
  detail::check_level(level);
  if (resolution < 16) throw ValidationError("envelope_3d: resolution must be at least 16");
  const Eigen::Matrix<double, 6, 3> basis = detail::boundary_basis<3>(g.covariance);
  const int lon = resolution;
  const int bands = std::max(2, resolution / 2);
  EnvelopeGeometry out;
  out.dimension = 3;
  out.level = level;
  auto add = [&](const Eigen::Vector3d& u) {
    const Twist3 xi = level * basis * u;
    out.vertices.push_back((g.mean * exp_se3(xi)).translation());
    out.boundary_twists.emplace_back(xi);
  };
  add(Eigen::Vector3d::UnitZ());
  for (int b = 1; b < bands; ++b) {
    const double polar = std::numbers::pi * b / bands;
    for (int j = 0; j < lon; ++j) {
      const double az = 2.0 * std::numbers::pi * j / lon;
      add({std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar)});
    }
  }
  add(-Eigen::Vector3d::UnitZ());
  out.spine = detail::spine<3>(g, basis, level);

  const int south = static_cast<int>(out.vertices.size()) - 1;
  auto ring = [&](int b, int j) { return 1 + (b - 1) * lon + (j % lon); };
  for (int j = 0; j < lon; ++j) out.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int b = 1; b + 1 < bands; ++b) {
    for (int j = 0; j < lon; ++j) {
      out.triangles.push_back({ring(b, j), ring(b + 1, j), ring(b + 1, j + 1)});
      out.triangles.push_back({ring(b, j), ring(b + 1, j + 1), ring(b, j + 1)});
    }
  }
  for (int j = 0; j < lon; ++j) out.triangles.push_back({south, ring(bands - 1, j + 1), ring(bands - 1, j)});

  // The basis may be a reflection of the unit sphere; keep normals outward.
  if (basis.bottomRows<3>().determinant() < 0.0) {
    for (auto& t : out.triangles) std::swap(t[1], t[2]);
  }
  return out;
}

// Every undirected edge used by exactly two triangles, once per direction.
inline bool is_watertight(const EnvelopeGeometry& geom) {
  if (geom.dimension != 3 || geom.triangles.empty()) return false;
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : geom.triangles) {
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  }
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    const auto twin = directed.find({edge.second, edge.first});
    if (twin == directed.end() || twin->second != 1) return false;
  }
  return true;
}

// Point-in-region: even-odd rule on the loop in 2D, generalized winding
// number of the shell in 3D.
inline bool contains(const EnvelopeGeometry& geom, const Eigen::Vector3d& p) {
  const auto& v = geom.vertices;
  if (geom.dimension == 2) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
        const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
        if (p.x() < x) inside = !inside;
      }
    }
    return inside;
  }
  double solid = 0.0;
  for (const auto& t : geom.triangles) {
    const Eigen::Vector3d a = v[t[0]] - p, b = v[t[1]] - p, c = v[t[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    solid += 2.0 * std::atan2(num, den);
  }
  return std::abs(solid / (4.0 * std::numbers::pi)) > 0.5;
}

// Shape metric. The spine's largest distance from the chord joining its
// endpoints, divided by the envelope's extent along that same direction
// (vertex offsets from the chord, max minus min). A Euclidean ellipse scores
// 0; a thin arc approaches 1.
struct BananaMetric {
  double chord_length = 0.0;
  double max_deviation = 0.0;
  double transverse_extent = 0.0;
  double ratio = 0.0;
  Eigen::Vector3d end_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d end_b = Eigen::Vector3d::Zero();
};

inline BananaMetric banana_metric(const EnvelopeGeometry& geom) {
  BananaMetric m;
  if (geom.spine.size() < 3 || geom.vertices.empty()) return m;
  m.end_a = geom.spine.front();
  m.end_b = geom.spine.back();
  const Eigen::Vector3d chord = m.end_b - m.end_a;
  m.chord_length = chord.norm();
  if (!(m.chord_length > 0.0)) return m;
  const Eigen::Vector3d dir = chord / m.chord_length;
  auto off = [&](const Eigen::Vector3d& p) {
    const Eigen::Vector3d d = p - m.end_a;
    return Eigen::Vector3d(d - d.dot(dir) * dir);
  };
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  for (const auto& p : geom.spine) {
    const Eigen::Vector3d o = off(p);
    if (o.norm() > m.max_deviation) {
      m.max_deviation = o.norm();
      normal = o;
    }
  }
  if (!(m.max_deviation > 0.0)) return m;
  normal /= m.max_deviation;
  double lo = 0.0, hi = 0.0;
  for (const auto& p : geom.vertices) {
    const double d = off(p).dot(normal);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  m.transverse_extent = hi - lo;
  if (m.transverse_extent > 0.0) m.ratio = m.max_deviation / m.transverse_extent;
  return m;
}

inline double banana_ratio(const EnvelopeGeometry& geom) { return banana_metric(geom).ratio; }

}  // namespace rae
