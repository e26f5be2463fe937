#include "barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jointrdf/error.hpp"

namespace jointrdf::detail {

SymCoords::SymCoords(int n) : n_(n) {
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) pairs_.emplace_back(i, j);
}

Matrix SymCoords::to_matrix(const Vector& x) const {
  Matrix m = Matrix::Zero(n_, n_);
  for (int a = 0; a < dim(); ++a) {
    const auto [i, j] = pairs_[a];
    m(i, j) = x(a);
    m(j, i) = x(a);
  }
  return m;
}

Vector SymCoords::pairing(const Matrix& g) const {
  Vector out(dim());
  for (int a = 0; a < dim(); ++a) {
    const auto [i, j] = pairs_[a];
    out(a) = (i == j) ? g(i, i) : g(i, j) + g(j, i);
  }
  return out;
}

Matrix SymCoords::logdet_hessian(const Matrix& am) const {
  // E_a = e_i e_j^T + e_j e_i^T (single term on the diagonal), and
  // tr(A u v^T A w z^T) = (z^T A u)(v^T A w).
  const int m = dim();
  Matrix h(m, m);
  for (int a = 0; a < m; ++a) {
    const auto [i, j] = pairs_[a];
    for (int b = a; b < m; ++b) {
      const auto [k, l] = pairs_[b];
      double v;
      if (i == j && k == l) {
        v = am(i, k) * am(i, k);
      } else if (i == j) {
        v = 2.0 * am(i, k) * am(i, l);
      } else if (k == l) {
        v = 2.0 * am(i, k) * am(j, k);
      } else {
        v = 2.0 * (am(i, l) * am(j, k) + am(i, k) * am(j, l));
      }
      h(a, b) = v;
      h(b, a) = v;
    }
  }
  return h;
}

namespace {

Matrix spd_inverse(const Matrix& a, Eigen::LLT<Matrix>& llt) {
  llt.compute(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Numerical, "barrier iterate left the feasible interior");
  }
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

// Eigenvalues of L^{-1} D L^{-T} where a = L L^T.
Vector whitened_eigs(const Eigen::LLT<Matrix>& llt, const Matrix& d) {
  const Matrix l_inv_d = llt.matrixL().solve(d);
  const Matrix m = llt.matrixL().solve(l_inv_d.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(m),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

BarrierResult run_barrier(const Matrix& q, int p1, int p2, double d1, double d2,
                          const SolverConfig& cfg) {
  const int n = p1 + p2;
  const SymCoords coords(n);
  const int m = coords.dim();

  Vector tr1 = Vector::Zero(m), tr2 = Vector::Zero(m);
  for (int a = 0; a < m; ++a) {
    const auto [i, j] = coords.pair(a);
    if (i == j) (i < p1 ? tr1 : tr2)(a) = 1.0;
  }

  const double q_min = linalg::min_eigenvalue(q);
  const double alpha0 =
      0.9 * std::min({d1 / p1, d2 / p2, q_min / 2.0});
  if (!(alpha0 > 0.0)) {
    throw Error(ErrorKind::Numerical, "no strictly feasible starting point");
  }

  BarrierResult r;
  r.sigma = alpha0 * Matrix::Identity(n, n);
  r.slack = q - r.sigma;
  r.s1 = d1 - alpha0 * p1;
  r.s2 = d2 - alpha0 * p2;

  const double nu = n + 2.0;
  double t = cfg.t_initial;
  Eigen::LLT<Matrix> llt_sigma, llt_slack;

  while (true) {
    for (int it = 0; it < cfg.max_newton_per_stage; ++it) {
      const Matrix sigma_inv = spd_inverse(r.sigma, llt_sigma);
      const Matrix slack_inv = spd_inverse(r.slack, llt_slack);

      Matrix g = -0.5 * t * sigma_inv + slack_inv;
      g.topLeftCorner(p1, p1).diagonal().array() += 1.0 / r.s1;
      g.bottomRightCorner(p2, p2).diagonal().array() += 1.0 / r.s2;
      const Vector grad = coords.pairing(g);

      Matrix hess = 0.5 * t * coords.logdet_hessian(sigma_inv) +
                    coords.logdet_hessian(slack_inv);
      hess.noalias() += (tr1 * tr1.transpose()) / (r.s1 * r.s1);
      hess.noalias() += (tr2 * tr2.transpose()) / (r.s2 * r.s2);

      // Jacobi scaling keeps the factorization stable near the boundary.
      const Vector scale = hess.diagonal().cwiseSqrt().cwiseInverse();
      const Matrix hs = scale.asDiagonal() * hess * scale.asDiagonal();
      Eigen::LDLT<Matrix> ldlt(hs);
      const Vector dx =
          -(scale.asDiagonal() * ldlt.solve(scale.asDiagonal() * grad)).eval();
      const double dec2 = -grad.dot(dx);
      ++r.newton_steps;
      if (!std::isfinite(dec2) || dec2 / 2.0 <= cfg.newton_tol) break;

      const Matrix dir = coords.to_matrix(dx);
      const double tau1 = tr1.dot(dx), tau2 = tr2.dot(dx);
      const Vector mu_sigma = whitened_eigs(llt_sigma, dir);
      const Vector mu_slack = whitened_eigs(llt_slack, dir);

      double step_max = std::numeric_limits<double>::infinity();
      if (mu_sigma.minCoeff() < 0.0) step_max = std::min(step_max, -1.0 / mu_sigma.minCoeff());
      if (mu_slack.maxCoeff() > 0.0) step_max = std::min(step_max, 1.0 / mu_slack.maxCoeff());
      if (tau1 > 0.0) step_max = std::min(step_max, r.s1 / tau1);
      if (tau2 > 0.0) step_max = std::min(step_max, r.s2 / tau2);
      double step = std::min(1.0, cfg.fraction_to_boundary * step_max);

      // Exact change of the barrier objective along the direction, evaluated
      // through the whitened eigenvalues to avoid cancellation.
      auto change = [&](double s) {
        double v = 0.0;
        for (Eigen::Index k = 0; k < mu_sigma.size(); ++k) v -= 0.5 * t * std::log1p(s * mu_sigma(k));
        for (Eigen::Index k = 0; k < mu_slack.size(); ++k) v -= std::log1p(-s * mu_slack(k));
        v -= std::log1p(-s * tau1 / r.s1);
        v -= std::log1p(-s * tau2 / r.s2);
        return v;
      };
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        if (change(step) <= -cfg.armijo_c * step * dec2) {
          accepted = true;
          break;
        }
        step *= cfg.backtrack;
      }
      if (!accepted) break;

      r.sigma = linalg::symmetrize(r.sigma + step * dir);
      r.slack = linalg::symmetrize(r.slack - step * dir);
      r.s1 -= step * tau1;
      r.s2 -= step * tau2;
    }
    if (nu / t < cfg.gap_tol) break;
    t *= cfg.t_factor;
  }
  r.t = t;
  return r;
}

}  // namespace jointrdf::detail
