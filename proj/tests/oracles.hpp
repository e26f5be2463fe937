#pragma once

// Independent reference computations used only by the tests. None of these
// share code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace jointrdf::oracle {

// Reverse water-filling by nested grid search over the water level theta:
// pick the theta on a uniform grid whose filled volume is closest to the
// budget, then zoom in around it.
inline double water_filling_rate(const Eigen::VectorXd& eigenvalues, double delta) {
  const Eigen::VectorXd mu = eigenvalues.cwiseMax(0.0);
  if (delta >= mu.sum()) return 0.0;
  auto filled = [&](double theta) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < mu.size(); ++j) s += std::min(theta, mu(j));
    return s;
  };
  double lo = 0.0, hi = mu.maxCoeff();
  double best = 0.5 * (lo + hi);
  for (int level = 0; level < 12; ++level) {
    const int points = 2001;
    double best_err = std::numeric_limits<double>::infinity();
    for (int k = 0; k < points; ++k) {
      const double theta = lo + (hi - lo) * k / (points - 1);
      const double err = std::abs(filled(theta) - delta);
      if (err < best_err) {
        best_err = err;
        best = theta;
      }
    }
    const double width = (hi - lo) / (points - 1);
    lo = std::max(0.0, best - 2 * width);
    hi = best + 2 * width;
  }
  double rate = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    if (mu(j) > best) rate += 0.5 * std::log(mu(j) / best);
  }
  return rate;
}

// Brute-force joint RDF for scalar sources (p1 = p2 = 1). Enumerates
// Sigma = [[s1, c], [c, s2]] on a grid of step `step` over (s1, s2); for each
// pair the cross term c is scanned over its feasible interval and every
// candidate is checked with explicit 2x2 eigenvalues. The best cell is then
// refined on progressively finer grids.
struct ScalarOracleResult {
  double rate = std::numeric_limits<double>::infinity();
  double s1 = 0.0, s2 = 0.0, c = 0.0;
};

inline double min_eig_2x2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return mean - rad;
}

inline ScalarOracleResult scalar_joint_rdf(const Eigen::Matrix2d& q, double d1, double d2,
                                           double step = 1e-3) {
  const double det_q = q(0, 0) * q(1, 1) - q(0, 1) * q(0, 1);
  const double tol = 1e-12 * q.cwiseAbs().maxCoeff();

  // Best feasible c for fixed (s1, s2): the point of the feasible interval
  // closest to 0 maximizes s1 s2 - c^2. Candidates are scanned on a grid and
  // then verified by the eigenvalue test.
  auto evaluate = [&](double s1, double s2, ScalarOracleResult& best) {
    const double a = q(0, 0) - s1, b = q(1, 1) - s2;
    if (a < -tol || b < -tol) return;
    const double r = std::sqrt(std::max(0.0, a * b));
    const double lo = q(0, 1) - r, hi = q(0, 1) + r;
    const double c_star = std::clamp(0.0, lo, hi);
    for (double c : {c_star, std::nextafter(c_star, q(0, 1))}) {
      if (min_eig_2x2(a, q(0, 1) - c, b) < -tol) continue;
      const double det_s = s1 * s2 - c * c;
      if (!(det_s > 0.0) || min_eig_2x2(s1, c, s2) <= 0.0) continue;
      const double rate = 0.5 * std::log(det_q / det_s);
      if (rate < best.rate) best = {rate, s1, s2, c};
      break;
    }
  };

  ScalarOracleResult best;
  double lo1 = step, hi1 = std::min(d1, q(0, 0));
  double lo2 = step, hi2 = std::min(d2, q(1, 1));
  double h = step;
  for (int level = 0; level < 4; ++level) {
    for (double s1 = lo1; s1 <= hi1 + 1e-15; s1 += h)
      for (double s2 = lo2; s2 <= hi2 + 1e-15; s2 += h) evaluate(std::min(s1, hi1), std::min(s2, hi2), best);
    // Also test the upper edges exactly.
    for (double s2 = lo2; s2 <= hi2 + 1e-15; s2 += h) evaluate(hi1, std::min(s2, hi2), best);
    for (double s1 = lo1; s1 <= hi1 + 1e-15; s1 += h) evaluate(std::min(s1, hi1), hi2, best);
    evaluate(hi1, hi2, best);
    const double cap1 = std::min(d1, q(0, 0)), cap2 = std::min(d2, q(1, 1));
    lo1 = std::max(h / 20, best.s1 - 2 * h);
    hi1 = std::min(cap1, best.s1 + 2 * h);
    lo2 = std::max(h / 20, best.s2 - 2 * h);
    hi2 = std::min(cap2, best.s2 + 2 * h);
    h /= 20;
  }
  return best;
}

// 1/2 ln det via an explicit Householder QR (independent of Cholesky).
inline double log_det_qr(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.matrixQR().diagonal().cwiseAbs().array().log().sum();
}

}  // namespace jointrdf::oracle
