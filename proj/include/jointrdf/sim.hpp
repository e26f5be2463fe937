#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "jointrdf/linalg.hpp"
#include "jointrdf/model.hpp"
#include "jointrdf/realization.hpp"

namespace jointrdf {

/// Philox4x32-10 counter-based generator. Every output block is a pure
/// function of (key, counter), so streams split by counter without state.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(Block counter) const;

  static constexpr const char* kName = "philox4x32-10";

 private:
  std::array<std::uint32_t, 2> key_;
};

/// Standard normal variates addressed by (stream, row, column).
class CounterNormal {
 public:
  explicit CounterNormal(std::uint64_t seed) : gen_(seed) {}

  /// Fills `out` (rows x cols) with independent N(0,1) draws; row r of the
  /// result depends only on (seed, stream, first_row + r).
  void fill(Matrix& out, std::uint32_t stream, std::uint64_t first_row = 0) const;

  static std::string identity();

 private:
  Philox4x32 gen_;
};

struct SampleBatch {
  int p1 = 0;
  int p2 = 0;
  Eigen::Index n = 0;
  Matrix x;     // n x (p1+p2) source draws
  Matrix xhat;  // n x (p1+p2) reproductions
  Matrix e;     // x - xhat
};

/// n i.i.d. zero-mean draws with covariance q, via an eigen factor with
/// negative eigenvalues clipped.
SampleBatch sample_source(const GaussianPairSource& src, Eigen::Index n,
                          std::uint64_t seed);

/// xhat = x H^T + v with v ~ N(0, Qv) independent of x; residuals filled.
SampleBatch push_channel(const SampleBatch& batch, const TestChannelRealization& r,
                         std::uint64_t seed);

struct DistortionCheck {
  double d_hat1 = 0.0;
  double d_hat2 = 0.0;
  double limit1 = 0.0;  // Delta1 (1 + 3 sqrt(2 p1 / n))
  double limit2 = 0.0;
  bool pass = false;
};

DistortionCheck check_distortion(const SampleBatch& batch, const DistortionPair& d);

struct EstimatorComparison {
  std::array<double, 2> mse{};     // per block, for this alternative
  std::array<double, 2> margin{};  // mse - mse of the conditional mean
  std::array<double, 2> slack{};   // 3 sigma_hat / sqrt(n) of the paired difference
  bool pass = false;
};

struct CmOptimalityReport {
  std::array<double, 2> cm_mse{};
  std::vector<EstimatorComparison> alternatives;
  bool pass = false;
};

/// Compares the empirical per-block MSE of each linear map g(Xhat) against
/// the conditional-mean map M Xhat.
CmOptimalityReport check_cm_optimality(const SampleBatch& batch,
                                       const TestChannelRealization& r,
                                       const std::vector<Matrix>& alternatives);

/// (1/n) e^T e for zero-mean residuals.
Matrix empirical_covariance(const Matrix& rows);

}  // namespace jointrdf
