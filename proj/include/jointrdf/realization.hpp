#pragma once

#include "jointrdf/linalg.hpp"
#include "jointrdf/model.hpp"
#include "jointrdf/solver.hpp"

namespace jointrdf {

/// Gaussian test channel Xhat = H X + V with V ~ N(0, Qv) independent of X.
struct TestChannelRealization {
  Matrix h;
  Matrix qv;
  GaussianPairSource source;
};

/// H = I - Sigma Q^{-1}, Qv = Sigma - Sigma Q^{-1} Sigma. Requires Q > 0 and
/// Q - Sigma >= 0 (to 1e-10 * ||Q||_2); throws Error(InvalidInput) otherwise.
TestChannelRealization realize(const GaussianPairSource& src,
                               const ErrorCovariance& sigma);

/// Experimental: solves H Q = Q - Sigma in the least-squares sense through the
/// pseudoinverse of Q, so singular sources are accepted. Qv = H Q - H Q H^T.
TestChannelRealization realize_least_squares(const GaussianPairSource& src,
                                             const ErrorCovariance& sigma);

/// cov(X, Xhat) = Q H^T.
Matrix cross_covariance(const TestChannelRealization& r);
/// cov(Xhat, Xhat) = H Q H^T + Qv.
Matrix reproduction_covariance(const TestChannelRealization& r);

struct Condition1Report {
  double deviation = 0.0;  // ||M - Pi||_F
  bool pass = false;
  int rank = 0;            // rank of cov(Xhat, Xhat)
  bool full_rank = false;  // Pi = I
};

Condition1Report verify_condition1(const TestChannelRealization& r,
                                   double tol = 1e-8);

/// M = cov(X, Xhat) cov(Xhat, Xhat)^+, the linear map xhat -> E{X | Xhat = xhat}.
Matrix conditional_mean_map(const TestChannelRealization& r);

/// Orthogonal projector onto the range of cov(Xhat, Xhat).
Matrix reproduction_range_projector(const TestChannelRealization& r);

/// Q - cov(X,Xhat) cov(Xhat,Xhat)^+ cov(X,Xhat)^T = cov(X | Xhat).
Matrix implied_error_covariance(const TestChannelRealization& r);

/// Structural residuals ||H Q - Q H^T||_F and lambda_min(Qv).
struct RealizationInvariants {
  double symmetry_residual = 0.0;
  double qv_min_eig = 0.0;
};
RealizationInvariants check_invariants(const TestChannelRealization& r);

/// I(X; Xhat) = 1/2 ln(det Q det cov(Xhat) / det J) for the joint covariance J
/// of (X, Xhat). Throws Error(Singular) when J is singular.
double channel_mutual_information(const TestChannelRealization& r);

}  // namespace jointrdf
