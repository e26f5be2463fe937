#pragma once

#include <array>
#include <chrono>
#include <string>

#include "jointrdf/linalg.hpp"
#include "jointrdf/model.hpp"

namespace jointrdf {

/// Error covariance Sigma_(E1,E2) with its 2x2 block partition.
class ErrorCovariance {
 public:
  ErrorCovariance() = default;
  ErrorCovariance(const Matrix& sigma, int p1, int p2);

  const Matrix& sigma() const { return sigma_; }
  int p1() const { return p1_; }
  int p2() const { return p2_; }
  Matrix sigma11() const { return sigma_.topLeftCorner(p1_, p1_); }
  Matrix sigma22() const { return sigma_.bottomRightCorner(p2_, p2_); }
  Matrix sigma12() const { return sigma_.topRightCorner(p1_, p2_); }
  double trace1() const { return sigma_.topLeftCorner(p1_, p1_).trace(); }
  double trace2() const { return sigma_.bottomRightCorner(p2_, p2_).trace(); }

 private:
  Matrix sigma_;
  int p1_ = 0;
  int p2_ = 0;
};

/// Distances from the feasible set {Q >= Sigma >= 0, tr Sigma_ii <= Delta_i}.
struct Feasibility {
  double min_eig_sigma = 0.0;
  double min_eig_slack = 0.0;  // lambda_min(Q - Sigma)
  double trace_excess1 = 0.0;  // tr(Sigma11) - Delta1
  double trace_excess2 = 0.0;

  bool ok(double psd_tol, double trace_tol = 1e-9) const {
    return min_eig_sigma >= -psd_tol && min_eig_slack >= -psd_tol &&
           trace_excess1 <= trace_tol && trace_excess2 <= trace_tol;
  }
};

Feasibility check_feasibility(const GaussianPairSource& src,
                              const ErrorCovariance& sigma,
                              const DistortionPair& d);

/// Multipliers (lambda1, lambda2, Theta) of the Lagrangian
///   1/2 ln det Q/det Sigma + tr(Theta (Sigma - Q))
///   + sum_i lambda_i (tr Sigma_ii - Delta_i) - tr(V Sigma)
/// with V = 0, together with their residuals.
struct KktCertificate {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Matrix theta;
  double stationarity_residual = 0.0;
  // lambda1 (tr S11 - D1), lambda2 (tr S22 - D2), tr(V S), tr(Theta (S - Q))
  std::array<double, 4> slackness_residuals{};
  double theta_min_eig = 0.0;
  bool dual_feasible = true;

  double max_slackness() const;
};

enum class Branch { ClosedFormInteriorD, InteriorPoint, ZeroRate, Infeasible };

std::string to_string(Branch b);

struct SolverConfig {
  double t_initial = 1.0;
  double t_factor = 10.0;
  double gap_tol = 1e-9;          // stop when (p1+p2+2)/t < gap_tol
  double newton_tol = 1e-12;      // stop centering when decrement^2/2 below
  int max_newton_per_stage = 100;
  double fraction_to_boundary = 0.99;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double region_tol = 1e-9;       // lambda_min(Q - Sigma*) > tol * ||Q||_2
  double boundary_snap_tol = 1e-7;  // relative; eigenvalues of Q - Sigma below are set to 0
  double kkt_tol = 1e-7;
  bool force_interior_point = false;
};

struct SolveReport {
  double rate_nats = 0.0;
  ErrorCovariance sigma;
  KktCertificate certificate;
  Branch branch = Branch::Infeasible;
  bool in_region_d = false;
  double gray_bound_nats = 0.0;
  int iterations = 0;
  std::chrono::duration<double> wall_time{0};
  double slack_min_eig = 0.0;  // lambda_min(Q - Sigma)

  bool infinite_rate() const { return branch == Branch::Infeasible; }
};

/// Block-diag((Delta1/p1) I, (Delta2/p2) I). No feasibility claim.
ErrorCovariance closed_form_candidate(const GaussianPairSource& src,
                                      const DistortionPair& d);

/// True iff lambda_min(Q - Sigma*) > tol * ||Q||_2 with Sigma* the closed-form
/// candidate. False whenever either distortion is zero.
bool in_region_d(const GaussianPairSource& src, const DistortionPair& d,
                 double tol = 1e-9);

/// 1/2 (ln det Q - ln det Sigma); +infinity when Sigma is not positive definite.
double rate_of(const GaussianPairSource& src, const ErrorCovariance& sigma);

/// Recomputes stationarity, slackness and dual-feasibility of `cert` at sigma.
KktCertificate kkt_residuals(const GaussianPairSource& src,
                             const ErrorCovariance& sigma,
                             const DistortionPair& d,
                             const KktCertificate& cert);

/// Joint rate-distortion function and its optimal error covariance.
SolveReport solve(const GaussianPairSource& src, const DistortionPair& d,
                  const SolverConfig& cfg = {});

}  // namespace jointrdf
