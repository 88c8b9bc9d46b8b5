#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rae/errors.hpp"
#include "rae/liegroup.hpp"
#include "rae/numerics.hpp"
#include "test_util.hpp"

using namespace rae;
using rae::test::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(So3, ExpZeroIsIdentity) {
  EXPECT_TRUE(exp_so3(Eigen::Vector3d::Zero()).matrix().isApprox(Eigen::Matrix3d::Identity(), 0.0));
}

TEST(So3, ExpQuarterTurnAboutZ) {
  Eigen::Matrix3d expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((exp_so3(Eigen::Vector3d(0, 0, kPi / 2)).matrix() - expected).norm(), 1e-15);
}

TEST(So3, ExpTimesExpOfNegativeIsIdentity) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d phi = rng.ball(kPi - 1e-3);
    const Eigen::Matrix3d m = (exp_so3(phi) * exp_so3(-phi)).matrix();
    EXPECT_LT((m - Eigen::Matrix3d::Identity()).norm(), 1e-14);
  }
}

TEST(So3, SmallAngleSeriesMatchesMatrixExponential) {
  for (double a : {1e-12, 1e-9, 5e-9, 2e-8, 1e-6}) {
    const Eigen::Vector3d phi = a * Eigen::Vector3d(0.3, -0.5, 0.81).normalized();
    const Eigen::Matrix3d ref = matrix_exponential(skew(phi));
    EXPECT_LT((exp_so3(phi).matrix() - ref).norm(), 1e-15) << a;
    EXPECT_LT((log_so3(exp_so3(phi)) - phi).norm(), 1e-15) << a;
  }
}

TEST(So3, LogIdentityIsZero) { EXPECT_EQ(log_so3(Rotation3()).norm(), 0.0); }

TEST(So3, LogQuarterTurn) {
  Eigen::Matrix3d c;
  c << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((log_so3(Rotation3(c)) - Eigen::Vector3d(0, 0, kPi / 2)).norm(), 1e-15);
}

TEST(So3, LogRoundTripRandom) {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d phi = rng.ball(kPi - 0.1);
    const Rotation3 c = exp_so3(phi);
    EXPECT_LT((exp_so3(log_so3(c)).matrix() - c.matrix()).norm(), 1e-9);
    EXPECT_LT((log_so3(c) - phi).norm(), 1e-9);
  }
}

TEST(So3, LogNearPiThrows) {
  EXPECT_THROW(log_so3(exp_so3(Eigen::Vector3d(0, kPi - 1e-7, 0))), AngleNearPi);
  EXPECT_THROW(log_so3(exp_so3(Eigen::Vector3d(kPi, 0, 0))), AngleNearPi);
  EXPECT_NO_THROW(log_so3(exp_so3(Eigen::Vector3d(0, 0, kPi - 1e-4))));
}

TEST(Se2, ZeroTwistIsIdentity) {
  const Pose2 t = exp_se2(Twist2::Zero());
  EXPECT_EQ(t.translation().norm(), 0.0);
  EXPECT_TRUE(t.rotation().matrix().isIdentity(0.0));
}

TEST(Se2, PureTranslation) {
  const Pose2 t = exp_se2(Twist2(0.0, 1.0, 2.0));
  EXPECT_EQ(t.translation(), Eigen::Vector2d(1.0, 2.0));
  EXPECT_TRUE(t.rotation().matrix().isIdentity(0.0));
}

TEST(Se2, QuarterTurnMatchesSeriesExponential) {
  const Twist2 xi(kPi / 2, 1.0, 0.0);
  const Pose2 t = exp_se2(xi);
  // V(pi/2) [1, 0] = [sin(t)/t, (1 - cos t)/t] = [2/pi, 2/pi].
  EXPECT_LT((t.translation() - Eigen::Vector2d(2 / kPi, 2 / kPi)).norm(), 1e-15);
  Eigen::Matrix3d series = Eigen::Matrix3d::Identity(), term = Eigen::Matrix3d::Identity();
  for (int k = 1; k <= 20; ++k) {
    term = term * hat_se2(xi) / k;
    series += term;
  }
  EXPECT_LT((t.matrix() - series).norm(), 1e-12);
}

TEST(Se2, LogRoundTripAndNearPi) {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const Twist2 xi = rng.twist2(kPi - 0.1, 5.0);
    EXPECT_LT((log_se2(exp_se2(xi)) - xi).norm(), 1e-9);
  }
  EXPECT_THROW(log_se2(exp_se2(Twist2(kPi - 1e-7, 0, 0))), AngleNearPi);
}

TEST(Se3, ZeroAndPureTranslation) {
  EXPECT_TRUE(exp_se3(Twist3::Zero()).matrix().isIdentity(0.0));
  Twist3 xi = Twist3::Zero();
  xi.tail<3>() << 1.5, -2.0, 0.25;
  const Pose3 t = exp_se3(xi);
  EXPECT_EQ(t.translation(), Eigen::Vector3d(1.5, -2.0, 0.25));
}

TEST(Se3, ExpMatchesMatrixExponential) {
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const Twist3 xi = rng.twist3(kPi - 0.1, 3.0);
    EXPECT_LT((exp_se3(xi).matrix() - matrix_exponential(hat_se3(xi))).norm(), 1e-12);
  }
}

TEST(Se3, LogRoundTripRandom) {
  Rng rng(32);
  for (int i = 0; i < 1000; ++i) {
    const Twist3 xi = rng.twist3(kPi - 0.1, 5.0);
    EXPECT_LT((log_se3(exp_se3(xi)) - xi).norm(), 1e-9);
  }
}

TEST(Adjoint, Se2Identity) { EXPECT_TRUE(adjoint_se2(Pose2()).isIdentity(0.0)); }

TEST(Adjoint, Se2QuarterTurnExample) {
  Eigen::Matrix3d expected;
  expected << 1, 0, 0, 0, 0, -1, -1, 1, 0;
  const Pose2 t(Rotation2::from_angle(kPi / 2), Eigen::Vector2d(1, 0));
  EXPECT_LT((adjoint_se2(t) - expected).norm(), 1e-15);
}

TEST(Adjoint, Se3IdentityAndTranslationBlock) {
  EXPECT_TRUE(adjoint_se3(Pose3()).isIdentity(0.0));
  const Matrix6d adj = adjoint_se3(Pose3::from_translation(Eigen::Vector3d(-2, 0, 0)));
  Eigen::Matrix3d expected;
  expected << 0, 0, 0, 0, 0, 2, 0, -2, 0;
  EXPECT_EQ((adj.bottomLeftCorner<3, 3>()), expected);
}

TEST(Adjoint, ConjugationIdentitySe2) {
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 t = rng.pose2();
    const Twist2 xi = rng.twist2(0.3, 0.3);
    const Pose2 lhs = exp_se2(adjoint_se2(t) * xi);
    const Pose2 rhs = t * exp_se2(xi) * t.inverse();
    EXPECT_LT((lhs.matrix() - rhs.matrix()).norm(), 1e-9);
    EXPECT_LT(((t * exp_se2(xi) * t.inverse()).log() - adjoint_se2(t) * xi).norm(), 1e-9);
  }
}

TEST(Adjoint, ConjugationIdentitySe3) {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const Pose3 t = rng.pose3();
    Twist3 xi = rng.twist3(0.25, 0.25);
    const Twist3 lhs = (t * exp_se3(xi) * t.inverse()).log();
    EXPECT_LT((lhs - adjoint_se3(t) * xi).norm(), 1e-9);
  }
}

TEST(Adjoint, CompositionIsHomomorphism) {
  Rng rng(43);
  for (int i = 0; i < 1000; ++i) {
    const Pose3 a = rng.pose3(), b = rng.pose3();
    EXPECT_LT((adjoint_se3(a * b) - adjoint_se3(a) * adjoint_se3(b)).norm(), 1e-9);
    const Pose2 c = rng.pose2(), d = rng.pose2();
    EXPECT_LT((adjoint_se2(c * d) - adjoint_se2(c) * adjoint_se2(d)).norm(), 1e-9);
  }
}

TEST(LittleAdjoint, MatchesLieBracket) {
  Rng rng(44);
  for (int i = 0; i < 100; ++i) {
    const Twist3 a = rng.twist3(1.0, 1.0), b = rng.twist3(1.0, 1.0);
    const Eigen::Matrix4d bracket = hat_se3(a) * hat_se3(b) - hat_se3(b) * hat_se3(a);
    EXPECT_LT((vee_se3(bracket) - ad_se3(a) * b).norm(), 1e-14);
    const Twist2 c = rng.twist2(1.0, 1.0), d = rng.twist2(1.0, 1.0);
    const Eigen::Matrix3d bracket2 = hat_se2(c) * hat_se2(d) - hat_se2(d) * hat_se2(c);
    EXPECT_LT((vee_se2(bracket2) - ad_se2(c) * d).norm(), 1e-14);
  }
}

TEST(Group, ComposeInverseAndSkew) {
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    const Pose3 t = rng.pose3();
    EXPECT_LT((compose(t, inverse(t)).matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-12);
    const Pose3 a = rng.pose3(), b = rng.pose3(), c = rng.pose3();
    EXPECT_LT((((a * b) * c).matrix() - (a * (b * c)).matrix()).norm(), 1e-12);
  }
  EXPECT_EQ(skew(Eigen::Vector3d(1, 0, 0)) * Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 0, 1));
}

TEST(Group, HomogeneousBottomRow) {
  Rng rng(52);
  const Eigen::Matrix4d m = rng.pose3().matrix();
  EXPECT_EQ(m.row(3), Eigen::RowVector4d(0, 0, 0, 1));
  const Eigen::Matrix3d m2 = rng.pose2().matrix();
  EXPECT_EQ(m2.row(2), Eigen::RowVector3d(0, 0, 1));
}

TEST(Group, RepeatedCompositionDrift) {
  Rng rng(53);
  Pose3 t;
  const Pose3 step = exp_se3(rng.twist3(0.2, 0.1));
  for (int i = 0; i < 10000; ++i) t = t * step;
  const Eigen::Matrix3d c = t.rotation().matrix();
  EXPECT_LT((c.transpose() * c - Eigen::Matrix3d::Identity()).norm(), 1e-7);
  EXPECT_TRUE(t.normalized().rotation().is_valid(1e-12));
}

TEST(Rotation2, AngleWrap) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(Rotation2::from_angle(0.3).angle(), 0.3, 1e-16);
}
