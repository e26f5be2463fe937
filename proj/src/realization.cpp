#include "jointrdf/realization.hpp"

#include <sstream>

#include "jointrdf/error.hpp"

namespace jointrdf {

namespace {
constexpr double kPsdTol = 1e-10;
constexpr double kRankTol = 1e-10;
}  // namespace

TestChannelRealization realize(const GaussianPairSource& src,
                               const ErrorCovariance& sigma) {
  if (!src.positive_definite()) {
    throw Error(ErrorKind::Singular, "realize requires a positive-definite source");
  }
  const int n = src.dim();
  if (sigma.sigma().rows() != n) {
    throw Error(ErrorKind::InvalidInput, "realize: dimension mismatch");
  }
  const double slack_min = linalg::min_eigenvalue(src.q() - sigma.sigma());
  if (slack_min < -kPsdTol * src.spectral_norm()) {
    std::ostringstream os;
    os << "Q - Sigma is not positive semidefinite (lambda_min = " << slack_min << ")";
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  const auto llt = src.q().llt();
  // Sigma Q^{-1} = (Q^{-1} Sigma)^T.
  const Matrix sigma_qinv = llt.solve(sigma.sigma()).transpose();
  TestChannelRealization r{Matrix::Identity(n, n) - sigma_qinv,
                           linalg::symmetrize(sigma.sigma() - sigma_qinv * sigma.sigma()),
                           src};
  return r;
}

TestChannelRealization realize_least_squares(const GaussianPairSource& src,
                                             const ErrorCovariance& sigma) {
  const auto pinv = linalg::sym_pinv(src.q(), kRankTol);
  const Matrix h = (src.q() - sigma.sigma()) * pinv.pinv;
  const Matrix hq = h * src.q();
  return {h, linalg::symmetrize(hq - hq * h.transpose()), src};
}

Matrix cross_covariance(const TestChannelRealization& r) {
  return r.source.q() * r.h.transpose();
}

Matrix reproduction_covariance(const TestChannelRealization& r) {
  return linalg::symmetrize(r.h * r.source.q() * r.h.transpose() + r.qv);
}

Matrix conditional_mean_map(const TestChannelRealization& r) {
  const auto pinv = linalg::sym_pinv(reproduction_covariance(r), kRankTol, r.source.spectral_norm());
  return cross_covariance(r) * pinv.pinv;
}

Matrix reproduction_range_projector(const TestChannelRealization& r) {
  return linalg::sym_pinv(reproduction_covariance(r), kRankTol, r.source.spectral_norm()).range_projector;
}

Condition1Report verify_condition1(const TestChannelRealization& r, double tol) {
  const Matrix cov_hh = reproduction_covariance(r);
  const auto pinv = linalg::sym_pinv(cov_hh, kRankTol, r.source.spectral_norm());
  const Matrix m = cross_covariance(r) * pinv.pinv;
  Condition1Report rep;
  rep.rank = pinv.rank;
  rep.full_rank = pinv.rank == cov_hh.rows();
  const Matrix target = rep.full_rank
                            ? Matrix::Identity(cov_hh.rows(), cov_hh.cols())
                            : pinv.range_projector;
  rep.deviation = (m * pinv.range_projector - target).norm();
  rep.pass = rep.deviation <= tol;
  return rep;
}

Matrix implied_error_covariance(const TestChannelRealization& r) {
  const Matrix c = cross_covariance(r);
  const auto pinv = linalg::sym_pinv(reproduction_covariance(r), kRankTol, r.source.spectral_norm());
  return linalg::symmetrize(r.source.q() - c * pinv.pinv * c.transpose());
}

RealizationInvariants check_invariants(const TestChannelRealization& r) {
  const Matrix hq = r.h * r.source.q();
  return {(hq - hq.transpose()).norm(), linalg::min_eigenvalue(r.qv)};
}

double channel_mutual_information(const TestChannelRealization& r) {
  const int n = r.source.dim();
  Matrix joint(2 * n, 2 * n);
  const Matrix c = cross_covariance(r);
  joint << r.source.q(), c, c.transpose(), reproduction_covariance(r);
  bool ok_q = false, ok_h = false, ok_j = false;
  const double ld_q = linalg::log_det_spd(r.source.q(), &ok_q);
  const double ld_h = linalg::log_det_spd(reproduction_covariance(r), &ok_h);
  const double ld_j = linalg::log_det_spd(joint, &ok_j);
  if (!ok_q || !ok_h || !ok_j) {
    throw Error(ErrorKind::Singular, "joint covariance of (X, Xhat) is singular");
  }
  return 0.5 * (ld_q + ld_h - ld_j);
}

}  // namespace jointrdf
