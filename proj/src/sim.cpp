#include "jointrdf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "jointrdf/error.hpp"

namespace jointrdf {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr std::uint32_t kSourceStream = 0;
constexpr std::uint32_t kNoiseStream = 1;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Uniform in (0, 1] from 64 random bits.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Block Philox4x32::operator()(Block c) const {
  std::uint32_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return c;
}

std::string CounterNormal::identity() {
  return std::string(Philox4x32::kName) + "/box-muller";
}

void CounterNormal::fill(Matrix& out, std::uint32_t stream,
                         std::uint64_t first_row) const {
  const Eigen::Index rows = out.rows(), cols = out.cols();
  const Eigen::Index pairs = (cols + 1) / 2;

  auto work = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index r = begin; r < end; ++r) {
      const std::uint64_t row = first_row + static_cast<std::uint64_t>(r);
      for (Eigen::Index j = 0; j < pairs; ++j) {
        const Philox4x32::Block b = gen_({static_cast<std::uint32_t>(j),
                              static_cast<std::uint32_t>(row),
                              static_cast<std::uint32_t>(row >> 32), stream});
        const double u1 = to_unit(b[0], b[1]);
        const double u2 = to_unit(b[2], b[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out(r, 2 * j) = radius * std::cos(angle);
        if (2 * j + 1 < cols) out(r, 2 * j + 1) = radius * std::sin(angle);
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const Eigen::Index shards = std::min<Eigen::Index>(hw, rows / 4096 + 1);
  if (shards <= 1) {
    work(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (rows + shards - 1) / shards;
  for (Eigen::Index s = 0; s < shards; ++s) {
    const Eigen::Index b = s * chunk, e = std::min(rows, b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& t : pool) t.join();
}

SampleBatch sample_source(const GaussianPairSource& src, Eigen::Index n,
                          std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "sample count must be >= 1");
  SampleBatch batch;
  batch.p1 = src.p1();
  batch.p2 = src.p2();
  batch.n = n;
  Matrix z(n, src.dim());
  CounterNormal(seed).fill(z, kSourceStream);
  batch.x = z * linalg::psd_factor(src.q()).transpose();
  return batch;
}

SampleBatch push_channel(const SampleBatch& batch, const TestChannelRealization& r,
                         std::uint64_t seed) {
  const Eigen::Index dim = batch.p1 + batch.p2;
  if (r.h.rows() != dim || r.h.cols() != dim || batch.x.cols() != dim) {
    throw Error(ErrorKind::InvalidInput, "push_channel: dimension mismatch");
  }
  SampleBatch out = batch;
  Matrix z(batch.n, dim);
  CounterNormal(seed).fill(z, kNoiseStream);
  out.xhat = batch.x * r.h.transpose() + z * linalg::psd_factor(r.qv).transpose();
  out.e = out.x - out.xhat;
  return out;
}

DistortionCheck check_distortion(const SampleBatch& batch, const DistortionPair& d) {
  DistortionCheck c;
  const double n = static_cast<double>(batch.n);
  c.d_hat1 = batch.e.leftCols(batch.p1).rowwise().squaredNorm().mean();
  c.d_hat2 = batch.e.rightCols(batch.p2).rowwise().squaredNorm().mean();
  c.limit1 = d.d1 * (1.0 + 3.0 * std::sqrt(2.0 * batch.p1 / n));
  c.limit2 = d.d2 * (1.0 + 3.0 * std::sqrt(2.0 * batch.p2 / n));
  c.pass = c.d_hat1 <= c.limit1 && c.d_hat2 <= c.limit2;
  return c;
}

CmOptimalityReport check_cm_optimality(const SampleBatch& batch,
                                       const TestChannelRealization& r,
                                       const std::vector<Matrix>& alternatives) {
  const Eigen::Index p1 = batch.p1, p2 = batch.p2;
  const double n = static_cast<double>(batch.n);
  auto block_errors = [&](const Matrix& g) {
    const Matrix resid = batch.x - batch.xhat * g.transpose();
    Matrix sq(batch.n, 2);
    sq.col(0) = resid.leftCols(p1).rowwise().squaredNorm();
    sq.col(1) = resid.rightCols(p2).rowwise().squaredNorm();
    return sq;
  };

  CmOptimalityReport rep;
  const Matrix cm_sq = block_errors(conditional_mean_map(r));
  rep.cm_mse = {cm_sq.col(0).mean(), cm_sq.col(1).mean()};
  rep.pass = true;
  for (const Matrix& g : alternatives) {
    if (g.rows() != p1 + p2 || g.cols() != p1 + p2) {
      throw Error(ErrorKind::InvalidInput, "alternative estimator has wrong shape");
    }
    const Matrix diff = block_errors(g) - cm_sq;
    EstimatorComparison cmp;
    cmp.pass = true;
    for (int b = 0; b < 2; ++b) {
      const double mean = diff.col(b).mean();
      const double var = (diff.col(b).array() - mean).square().sum() / std::max(1.0, n - 1.0);
      cmp.mse[b] = rep.cm_mse[b] + mean;
      cmp.margin[b] = mean;
      cmp.slack[b] = 3.0 * std::sqrt(var) / std::sqrt(n);
      cmp.pass = cmp.pass && cmp.margin[b] >= -cmp.slack[b];
    }
    rep.pass = rep.pass && cmp.pass;
    rep.alternatives.push_back(cmp);
  }
  return rep;
}

Matrix empirical_covariance(const Matrix& rows) {
  return (rows.transpose() * rows) / static_cast<double>(rows.rows());
}

}  // namespace jointrdf
