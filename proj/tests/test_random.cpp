#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rae/random.hpp"
#include "test_util.hpp"

using namespace rae;

TEST(Philox, KnownAnswer) {
  const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  const auto ones = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                      {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ones, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  const auto pi = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                    {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(pi, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, DeterministicPerStream) {
  CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    const std::uint64_t vc = c.next_u64(), vd = d.next_u64();
    EXPECT_NE(va, vc);
    EXPECT_NE(va, vd);
  }
}

TEST(CounterRng, UniformOpenInterval) {
  CounterRng rng(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.003);
}

TEST(CounterRng, NormalMoments) {
  double s1 = 0, s2 = 0, s4 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(3, i);
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(s4 / n, 3.0, 0.06);
}

TEST(GaussianSampler, EmpiricalCovariance) {
  test::Rng gen(5);
  const Eigen::Matrix<double, 6, 6> cov = gen.spd<6>(1e-4, 1.0);
  const GaussianSampler<6> draw(cov);
  Eigen::Matrix<double, 6, 6> acc = Eigen::Matrix<double, 6, 6>::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    CounterRng rng(11, i);
    const auto x = draw(rng);
    acc += x * x.transpose();
  }
  EXPECT_LT((acc / n - cov).norm() / cov.norm(), 0.02);
}

TEST(GaussianSampler, ZeroAndSingularCovariance) {
  const GaussianSampler<3> zero(Eigen::Matrix3d::Zero());
  CounterRng rng(1, 1);
  EXPECT_TRUE(zero(rng).isZero(0.0));
  Eigen::Matrix3d singular = Eigen::Matrix3d::Zero();
  singular(0, 0) = 4.0;
  const GaussianSampler<3> rank_one(singular);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d x = rank_one(rng);
    EXPECT_LT(x.tail<2>().norm(), 1e-6);
  }
}
