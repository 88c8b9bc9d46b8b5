#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rae/compounding.hpp"
#include "rae/envelope.hpp"
#include "rae/errors.hpp"
#include "rae/numerics.hpp"
#include "rae/random.hpp"
#include "test_util.hpp"

using namespace rae;
using rae::test::deg;

namespace {

GaussianPose<2> rb_gaussian(double r, double sigma_r, double sigma_t, double delta = 1e-5) {
  const Pose2 mean = rb_to_pose2({r, 0.3, 0.0});
  return {mean, propagate_to_point<2>(r, sensor_covariance_2d({sigma_r, sigma_t, 0.0, delta}))};
}

GaussianPose<3> rae_gaussian(double r, double sigma_r, double sigma_az, double sigma_el) {
  const Pose3 mean = rae_to_pose3({r, deg(20.0), deg(-10.0), 0.0});
  return {mean, propagate_to_point<3>(r, sensor_covariance_3d({sigma_r, sigma_az, sigma_el, 1e-5}))};
}

template <int N>
double tangent_mahalanobis(const GaussianPose<N>& g, const Eigen::VectorXd& xi) {
  const Tangent<N> v = xi;
  return std::sqrt(v.dot(g.covariance.matrix.ldlt().solve(v)));
}

double chord_deviation(const std::vector<Eigen::Vector3d>& pts) {
  const Eigen::Vector3d a = pts.front(), dir = (pts.back() - a).normalized();
  double dev = 0.0;
  for (const auto& p : pts) {
    const Eigen::Vector3d d = p - a;
    dev = std::max(dev, (d - d.dot(dir) * dir).norm());
  }
  return dev;
}

}  // namespace

TEST(Envelope2d, LoopSizeAndLevel) {
  const auto g = rb_gaussian(2.0, 0.03, deg(10.0));
  const auto env = envelope_2d(g, 3.0, 64);
  EXPECT_EQ(env.dimension, 2);
  EXPECT_EQ(env.vertices.size(), 64u);
  EXPECT_EQ(env.boundary_twists.size(), 64u);
  EXPECT_TRUE(env.triangles.empty());
  for (std::size_t i = 0; i < env.vertices.size(); ++i) {
    EXPECT_NEAR(tangent_mahalanobis(g, env.boundary_twists[i]), 3.0, 1e-9);
    EXPECT_EQ(env.vertices[i].z(), 0.0);
    const Eigen::Vector2d p = (g.mean * exp_se2(Twist2(env.boundary_twists[i]))).translation();
    EXPECT_LT((p - env.vertices[i].head<2>()).norm(), 1e-15);
  }
}

TEST(Envelope2d, LinearLimitIsEllipse) {
  const double r = 2.0;
  const auto g = rb_gaussian(r, 0.03, 1e-7, 1e-3);
  const auto env = envelope_2d(g, 3.0, 128);
  const Eigen::Matrix2d c = g.mean.rotation().matrix();
  const Eigen::Matrix2d s = c * g.covariance.matrix.bottomRightCorner<2, 2>() * c.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s);
  const Eigen::Matrix2d root = es.operatorSqrt(), inv_root = es.operatorInverseSqrt();
  double worst = 0.0;
  for (const auto& v : env.vertices) {
    const Eigen::Vector2d d = v.head<2>() - g.mean.translation();
    // Distance to the ellipse along the ray through the vertex.
    const Eigen::Vector2d unit = inv_root * d;
    const Eigen::Vector2d on = root * (3.0 * unit.normalized());
    worst = std::max(worst, (d - on).norm());
  }
  EXPECT_LT(worst, 1e-6 * r);
  EXPECT_LT(banana_ratio(env), 1e-3);
}

TEST(Envelope2d, WideBearingBulgesAwayFromSensor) {
  const auto g = rb_gaussian(2.0, 0.03, deg(10.0));
  const auto env = envelope_2d(g, 3.0, 128);
  const BananaMetric m = banana_metric(env);
  EXPECT_GT(m.ratio, 0.3);
  EXPECT_GT(m.max_deviation, 0.1 * 2.0 * std::pow(deg(10.0), 2));
  const Eigen::Vector3d mid = env.spine[env.spine.size() / 2];
  const Eigen::Vector3d chord_mid = 0.5 * (m.end_a + m.end_b);
  const Eigen::Vector3d range_dir = lift(Eigen::Vector2d(g.mean.rotation().matrix().col(0)));
  EXPECT_GT((mid - chord_mid).dot(range_dir), 0.0);
}

TEST(Envelope2d, ContainmentMatchesChiSquare) {
  const auto g = rb_gaussian(10.0, 0.05, deg(5.0));
  const auto env = envelope_2d(g, 3.0, 512);
  const GaussianSampler<3> draw(g.covariance.matrix);
  const int n = 100000;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(41, i);
    const Eigen::Vector2d p = (g.mean * exp_se2(draw(rng))).translation();
    if (contains(env, lift(p))) ++inside;
  }
  EXPECT_NEAR(static_cast<double>(inside) / n, chi_square_cdf(9.0, 2), 0.01);
}

TEST(Envelope2d, Errors) {
  const auto g = rb_gaussian(2.0, 0.03, deg(10.0));
  EXPECT_THROW(envelope_2d(g, 3.0, 15), ValidationError);
  EXPECT_THROW(envelope_2d(g, 0.0, 32), ValidationError);
  GaussianPose<2> flat = g;
  flat.covariance.matrix.setZero();
  flat.covariance.matrix(0, 0) = 1e-2;
  flat.covariance.matrix(1, 1) = 1e-4;
  EXPECT_THROW(envelope_2d(flat, 3.0, 32), SingularCovariance);
}

TEST(Envelope3d, IsotropicPositionIsSphere) {
  const double sigma = 0.2, level = 3.0;
  test::Rng rng(3);
  GaussianPose<3> g{rng.pose3(), {Matrix6d::Zero(), Datum::point, Frame::measurement}};
  g.covariance.matrix.bottomRightCorner<3, 3>() = sigma * sigma * Eigen::Matrix3d::Identity();
  const auto env = envelope_3d(g, level, 32);
  for (const auto& v : env.vertices) EXPECT_NEAR((v - g.mean.translation()).norm(), level * sigma, 1e-9);
  EXPECT_TRUE(is_watertight(env));
}

TEST(Envelope3d, WatertightAndOutward) {
  for (int res : {16, 24, 33}) {
    const auto g = rae_gaussian(5.0, 0.01, deg(7.0), deg(3.0));
    const auto env = envelope_3d(g, 3.0, res);
    EXPECT_TRUE(is_watertight(env)) << res;
    EXPECT_EQ(env.vertices.size(), static_cast<std::size_t>(2 + res * (res / 2 - 1)));
    // Signed volume with outward winding is positive.
    double vol = 0.0;
    for (const auto& t : env.triangles) {
      vol += env.vertices[t[0]].dot(env.vertices[t[1]].cross(env.vertices[t[2]])) / 6.0;
    }
    EXPECT_GT(vol, 0.0);
    for (const auto& xi : env.boundary_twists) EXPECT_NEAR(tangent_mahalanobis(g, xi), 3.0, 1e-9);
  }
  EnvelopeGeometry loop = envelope_2d(rb_gaussian(2.0, 0.03, 0.1), 3.0, 32);
  EXPECT_FALSE(is_watertight(loop));
}

TEST(Envelope3d, TwoCurvedPrincipalDirections) {
  // sigma_r = 1 cm, 3 and 7 degrees on the two perpendicular axes.
  const double r = 5.0, level = 3.0;
  const auto g = rae_gaussian(r, 0.01, deg(7.0), deg(3.0));
  const auto env = envelope_3d(g, level, 48);
  EXPECT_TRUE(is_watertight(env));
  EXPECT_GT(chord_deviation(env.spine), 0.1 * r * std::pow(deg(7.0), 2));
  // Sweep the minor angular direction as well.
  const Eigen::Matrix<double, 6, 3> basis = detail::boundary_basis<3>(g.covariance);
  const Eigen::Matrix3d rr = g.covariance.matrix.bottomRightCorner<3, 3>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(rr);
  const Eigen::Vector3d u_mid = es.eigenvectors().col(1);
  std::vector<Eigen::Vector3d> minor;
  for (int i = 0; i <= 32; ++i) {
    const double s = -1.0 + i / 16.0;
    minor.push_back((g.mean * exp_se3(Twist3(s * level * basis * u_mid))).translation());
  }
  EXPECT_GT(chord_deviation(minor), 0.1 * r * std::pow(deg(3.0), 2));
  EXPECT_GT(banana_ratio(env), 0.3);
}

TEST(Envelope3d, ContainmentMatchesChiSquare) {
  const auto g = rae_gaussian(10.0, 0.01, deg(5.0), deg(2.0));
  const auto env = envelope_3d(g, 3.0, 32);
  const GaussianSampler<6> draw(g.covariance.matrix);
  const int n = 100000;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(42, i);
    if (contains(env, (g.mean * exp_se3(draw(rng))).translation())) ++inside;
  }
  EXPECT_NEAR(static_cast<double>(inside) / n, chi_square_cdf(9.0, 3), 0.01);
}

TEST(Envelope3d, ContainsCentreNotFarPoint) {
  const auto g = rae_gaussian(5.0, 0.01, deg(3.0), deg(3.0));
  const auto env = envelope_3d(g, 3.0, 24);
  EXPECT_TRUE(contains(env, g.mean.translation()));
  EXPECT_FALSE(contains(env, g.mean.translation() + Eigen::Vector3d(5, 5, 5)));
  EXPECT_FALSE(contains(env, Eigen::Vector3d::Zero()));
}

TEST(Envelope3d, PaperLiteralPositionBlockIsFlat) {
  const Pose3 mean = rae_to_pose3({5.0, 0.0, 0.0, 0.0});
  const GaussianPose<3> g{mean, propagate_to_point<3>(
                                    5.0, sensor_covariance_3d({0.01, deg(3.0), deg(3.0), 1e-5},
                                                              SlotOrder::paper_literal))};
  // One lateral axis is only delta-thick but still full rank.
  const auto env = envelope_3d(g, 3.0, 16);
  EXPECT_TRUE(is_watertight(env));
  double lo = 1e9, hi = -1e9;
  for (const auto& v : env.vertices) {
    lo = std::min(lo, v.y());
    hi = std::max(hi, v.y());
  }
  EXPECT_LT(hi - lo, 1e-3);
}
