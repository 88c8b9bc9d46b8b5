#pragma once

// Counter-based random numbers. Philox4x32-10 (Salmon et al., SC'11) keyed by
// the user seed; the counter holds (block index, stream id). A stream id is
// normally a sample index, so any partitioning of samples across workers
// reproduces the same draws.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace rae {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

// Sequential draws from one (seed, stream) pair.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint64_t next_u64() {
    if (avail_ == 0) refill();
    const std::uint64_t v = (std::uint64_t{buf_[4 - avail_]} << 32) | buf_[5 - avail_];
    avail_ -= 2;
    return v;
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  template <int D>
  Eigen::Matrix<double, D, 1> normal_vector() {
    Eigen::Matrix<double, D, 1> v;
    for (int i = 0; i < D; ++i) v(i) = normal();
    return v;
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32)};
    buf_ = Philox4x32::block(ctr, key_);
    ++block_;
    avail_ = 4;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buf_{};
  int avail_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Draws N(0, S) through the Cholesky factor of S + 1e-15 I.
template <int D>
class GaussianSampler {
 public:
  using Matrix = Eigen::Matrix<double, D, D>;
  using Vector = Eigen::Matrix<double, D, 1>;

  explicit GaussianSampler(const Matrix& cov) {
    const Matrix jittered = cov + 1e-15 * Matrix::Identity();
    Eigen::LLT<Matrix> llt(jittered);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
    } else {
      // Exactly singular (e.g. an all-zero covariance): fall back to a
      // symmetric square root with negative eigenvalues clipped.
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov + cov.transpose()));
      factor_ = es.eigenvectors() *
                es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    zero_ = cov.cwiseAbs().maxCoeff() == 0.0;
  }

  Vector operator()(CounterRng& rng) const {
    const Vector z = rng.normal_vector<D>();
    if (zero_) return Vector::Zero();
    return factor_ * z;
  }

 private:
  Matrix factor_;
  bool zero_ = false;
};

}  // namespace rae
