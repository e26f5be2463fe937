#include "jointrdf/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "barrier.hpp"
#include "jointrdf/error.hpp"

namespace jointrdf {

ErrorCovariance::ErrorCovariance(const Matrix& sigma, int p1, int p2)
    : sigma_(linalg::symmetrize(sigma)), p1_(p1), p2_(p2) {
  if (sigma.rows() != p1 + p2 || sigma.cols() != p1 + p2) {
    throw Error(ErrorKind::InvalidInput, "error covariance: dimension mismatch");
  }
}

Feasibility check_feasibility(const GaussianPairSource& src,
                              const ErrorCovariance& sigma,
                              const DistortionPair& d) {
  Feasibility f;
  f.min_eig_sigma = linalg::min_eigenvalue(sigma.sigma());
  f.min_eig_slack = linalg::min_eigenvalue(src.q() - sigma.sigma());
  f.trace_excess1 = sigma.trace1() - d.d1;
  f.trace_excess2 = sigma.trace2() - d.d2;
  return f;
}

double KktCertificate::max_slackness() const {
  double m = 0.0;
  for (double r : slackness_residuals) m = std::max(m, std::abs(r));
  return m;
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::ClosedFormInteriorD: return "ClosedFormInteriorD";
    case Branch::InteriorPoint: return "InteriorPoint";
    case Branch::ZeroRate: return "ZeroRate";
    case Branch::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

ErrorCovariance closed_form_candidate(const GaussianPairSource& src,
                                      const DistortionPair& d) {
  const int p1 = src.p1(), p2 = src.p2();
  Matrix s = Matrix::Zero(p1 + p2, p1 + p2);
  s.topLeftCorner(p1, p1).diagonal().setConstant(d.d1 / p1);
  s.bottomRightCorner(p2, p2).diagonal().setConstant(d.d2 / p2);
  return ErrorCovariance(s, p1, p2);
}

bool in_region_d(const GaussianPairSource& src, const DistortionPair& d,
                 double tol) {
  // Zero budget: Q - 0 > 0 but the rate is infinite.
  if (d.has_zero()) return false;
  const ErrorCovariance cand = closed_form_candidate(src, d);
  return linalg::min_eigenvalue(src.q() - cand.sigma()) >
         tol * src.spectral_norm();
}

double rate_of(const GaussianPairSource& src, const ErrorCovariance& sigma) {
  bool ok_q = false, ok_s = false;
  const double ld_q = linalg::log_det_spd(src.q(), &ok_q);
  const double ld_s = linalg::log_det_spd(sigma.sigma(), &ok_s);
  if (!ok_q) throw Error(ErrorKind::Singular, "rate_of: source covariance is singular");
  if (!ok_s) return std::numeric_limits<double>::infinity();
  return 0.5 * (ld_q - ld_s);
}

KktCertificate kkt_residuals(const GaussianPairSource& src,
                             const ErrorCovariance& sigma,
                             const DistortionPair& d,
                             const KktCertificate& cert) {
  const int p1 = src.p1(), p2 = src.p2(), n = p1 + p2;
  Eigen::LLT<Matrix> llt(sigma.sigma());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Singular, "kkt_residuals: sigma is not positive definite");
  }
  KktCertificate out = cert;
  if (out.theta.size() == 0) out.theta = Matrix::Zero(n, n);
  out.theta = linalg::symmetrize(out.theta);

  Matrix stat = -0.5 * llt.solve(Matrix::Identity(n, n));
  stat.topLeftCorner(p1, p1).diagonal().array() += out.lambda1;
  stat.bottomRightCorner(p2, p2).diagonal().array() += out.lambda2;
  stat += out.theta;
  out.stationarity_residual = stat.norm();

  out.slackness_residuals = {
      std::abs(out.lambda1 * (sigma.trace1() - d.d1)),
      std::abs(out.lambda2 * (sigma.trace2() - d.d2)),
      0.0,  // V = 0 identically
      std::abs((out.theta * (sigma.sigma() - src.q())).trace()),
  };
  out.theta_min_eig = linalg::min_eigenvalue(out.theta);
  out.dual_feasible = out.lambda1 >= 0.0 && out.lambda2 >= 0.0 &&
                      out.theta_min_eig >=
                          -1e-10 * std::max(1.0, linalg::spectral_norm(out.theta));
  return out;
}

namespace {

// Filling the null directions of Q - Sigma can push a block trace slightly past
// its budget. Removes the excess along P E_i P, with P the projector onto the
// range of Q - Sigma, so the null space is kept.
Matrix trim_traces(const Matrix& sigma, const Matrix& range_proj, int p1, int p2,
                   const DistortionPair& d) {
  const int n = p1 + p2;
  const ErrorCovariance cov(sigma, p1, p2);
  const Eigen::Vector2d excess(std::max(cov.trace1() - d.d1, 0.0),
                               std::max(cov.trace2() - d.d2, 0.0));
  if (excess.isZero()) return sigma;
  std::array<Matrix, 2> dirs;
  for (int i = 0; i < 2; ++i) {
    Matrix sel = Matrix::Zero(n, n);
    if (i == 0) sel.topLeftCorner(p1, p1).setIdentity();
    else sel.bottomRightCorner(p2, p2).setIdentity();
    dirs[i] = linalg::symmetrize(range_proj * sel * range_proj);
  }
  Eigen::Matrix2d traces;
  for (int j = 0; j < 2; ++j) {
    const ErrorCovariance dj(dirs[j], p1, p2);
    traces(0, j) = dj.trace1();
    traces(1, j) = dj.trace2();
  }
  const Eigen::FullPivLU<Eigen::Matrix2d> lu(traces);
  if (lu.isInvertible()) {
    const Eigen::Vector2d coef = lu.solve(excess);
    if (coef.allFinite() && coef.minCoeff() >= 0.0)
      return linalg::symmetrize(sigma - coef(0) * dirs[0] - coef(1) * dirs[1]);
  }
  // Otherwise a multiple of P itself, large enough for both blocks.
  const Eigen::Vector2d reach = traces.rowwise().sum();
  double c = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (excess(i) <= 0.0) continue;
    if (reach(i) <= 0.0) return sigma;
    c = std::max(c, excess(i) / reach(i));
  }
  return linalg::symmetrize(sigma - c * range_proj);
}

// Least-squares fit of (lambda1, lambda2, Theta = N M N^T) to the stationarity
// condition, N spanning the near-null space of Q - Sigma.
KktCertificate fit_multipliers(const Matrix& sigma, const Matrix& active, int p1,
                               int p2) {
  const int n = p1 + p2;
  const int k = static_cast<int>(active.cols());
  const int n_sym = k * (k + 1) / 2;
  const Matrix target = 0.5 * linalg::symmetrize(
                                  sigma.llt().solve(Matrix::Identity(n, n)));

  Matrix a(n * n, 2 + n_sym);
  Matrix basis = Matrix::Zero(n, n);
  basis.topLeftCorner(p1, p1).setIdentity();
  a.col(0) = basis.reshaped();
  basis.setZero();
  basis.bottomRightCorner(p2, p2).setIdentity();
  a.col(1) = basis.reshaped();
  int col = 2;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      Matrix e = active.col(i) * active.col(j).transpose();
      if (i != j) e += active.col(j) * active.col(i).transpose();
      a.col(col++) = e.reshaped();
    }
  }
  const Vector b = target.reshaped();
  const Vector x = a.colPivHouseholderQr().solve(b);

  KktCertificate cert;
  cert.lambda1 = std::max(0.0, x(0));
  cert.lambda2 = std::max(0.0, x(1));
  Matrix m = Matrix::Zero(k, k);
  col = 2;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      m(i, j) = x(col);
      m(j, i) = x(col);
      ++col;
    }
  }
  if (k > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    m = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
        es.eigenvectors().transpose();
    cert.theta = linalg::symmetrize(active * m * active.transpose());
  } else {
    cert.theta = Matrix::Zero(n, n);
  }
  return cert;
}

// Newton's method on the first-order system of the face Q - Sigma = L L^T:
//   (-1/2 Sigma^-1 + Lambda) L = 0,  tr Sigma_ii = Delta_i for active i,
// in the unknowns (L, lambda_active). L moves freely, so the null space of
// Q - Sigma is refined along with Sigma. The Jacobian is singular along
// rotations L -> L O, hence the minimum-norm solve.
struct FaceSolution {
  Matrix sigma;
  Matrix null_basis;
  bool ok = false;
};

FaceSolution refine_on_face(const Matrix& q, const Matrix& l0, int p1, int p2,
                            const DistortionPair& d, const std::array<bool, 2>& active,
                            std::array<double, 2> lambda) {
  const int n = p1 + p2;
  const auto k = l0.cols();
  FaceSolution out;
  if (k == 0) return out;
  std::vector<int> idx;
  for (int i = 0; i < 2; ++i) {
    if (active[i]) idx.push_back(i);
    else lambda[i] = 0.0;
  }
  const auto m = static_cast<Eigen::Index>(idx.size());
  const auto nk = static_cast<Eigen::Index>(n) * k;
  const std::array<double, 2> budget = {d.d1, d.d2};
  auto block_rows = [&](int i) { return i == 0 ? std::pair{0, p1} : std::pair{p1, p2}; };

  auto residual = [&](const Matrix& l, const std::array<double, 2>& lam, const Matrix& sinv) {
    Vector f(nk + m);
    Matrix s = -0.5 * sinv;
    s.topLeftCorner(p1, p1).diagonal().array() += lam[0];
    s.bottomRightCorner(p2, p2).diagonal().array() += lam[1];
    f.head(nk) = Eigen::Map<const Vector>(Matrix(s * l).data(), nk);
    const Matrix sigma = q - l * l.transpose();
    for (Eigen::Index jj = 0; jj < m; ++jj) {
      const auto [r0, rn] = block_rows(idx[jj]);
      f(nk + jj) = sigma.block(r0, r0, rn, rn).trace() - budget[idx[jj]];
    }
    return f;
  };
  auto inverse_sigma = [&](const Matrix& l, Matrix& sinv) {
    Eigen::LLT<Matrix> llt(linalg::symmetrize(q - l * l.transpose()));
    if (llt.info() != Eigen::Success) return false;
    sinv = linalg::symmetrize(llt.solve(Matrix::Identity(n, n)));
    return true;
  };

  Matrix l = l0, sinv;
  if (!inverse_sigma(l, sinv)) return out;
  Vector f = residual(l, lambda, sinv);
  for (int iter = 0; iter < 30 && f.norm() > 1e-15; ++iter) {
    Matrix s = -0.5 * sinv;
    s.topLeftCorner(p1, p1).diagonal().array() += lambda[0];
    s.bottomRightCorner(p2, p2).diagonal().array() += lambda[1];
    const Matrix sinv_l = sinv * l;
    Matrix jac = Matrix::Zero(nk + m, nk + m);
    for (Eigen::Index c = 0; c < nk; ++c) {
      Matrix dl = Matrix::Zero(n, k);
      dl(c % n, c / n) = 1.0;
      const Matrix dz = dl * l.transpose() + l * dl.transpose();
      const Matrix col = -0.5 * sinv * dz * sinv_l + s * dl;
      jac.col(c).head(nk) = Eigen::Map<const Vector>(col.data(), nk);
      for (Eigen::Index jj = 0; jj < m; ++jj) {
        const auto [r0, rn] = block_rows(idx[jj]);
        jac(nk + jj, c) = -dz.block(r0, r0, rn, rn).trace();
      }
    }
    for (Eigen::Index jj = 0; jj < m; ++jj) {
      const auto [r0, rn] = block_rows(idx[jj]);
      Matrix col = Matrix::Zero(n, k);
      col.middleRows(r0, rn) = l.middleRows(r0, rn);
      jac.col(nk + jj).head(nk) = Eigen::Map<const Vector>(col.data(), nk);
    }
    const Vector step = jac.completeOrthogonalDecomposition().solve(-f);
    if (!step.allFinite()) return out;

    bool moved = false;
    for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
      Matrix l_next = l + alpha * Eigen::Map<const Matrix>(step.data(), n, k);
      std::array<double, 2> lam_next = lambda;
      for (Eigen::Index jj = 0; jj < m; ++jj) lam_next[idx[jj]] += alpha * step(nk + jj);
      Matrix sinv_next;
      if (!inverse_sigma(l_next, sinv_next)) continue;
      const Vector f_next = residual(l_next, lam_next, sinv_next);
      if (f_next.norm() < f.norm()) {
        l = l_next;
        lambda = lam_next;
        sinv = sinv_next;
        f = f_next;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (lambda[0] < 0.0 || lambda[1] < 0.0) return out;

  out.sigma = linalg::symmetrize(q - l * l.transpose());
  Eigen::JacobiSVD<Matrix> svd(l, Eigen::ComputeFullU);
  out.null_basis = svd.matrixU().rightCols(n - k);
  out.ok = true;
  return out;
}

void finish_report(const GaussianPairSource& src, const DistortionPair& d,
                   SolveReport& rep) {
  rep.slack_min_eig = linalg::min_eigenvalue(src.q() - rep.sigma.sigma());
  rep.gray_bound_nats = gray_lower_bound(src, d);
}

}  // namespace

SolveReport solve(const GaussianPairSource& src, const DistortionPair& d,
                  const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (!src.positive_definite()) {
    throw Error(ErrorKind::Singular, "solve requires a positive-definite source covariance");
  }
  const int p1 = src.p1(), p2 = src.p2(), n = p1 + p2;
  SolveReport rep;

  if (d.has_zero()) {
    rep.branch = Branch::Infeasible;
    rep.rate_nats = std::numeric_limits<double>::infinity();
    rep.sigma = ErrorCovariance(Matrix::Zero(n, n), p1, p2);
    rep.gray_bound_nats = std::numeric_limits<double>::infinity();
    rep.wall_time = std::chrono::steady_clock::now() - start;
    return rep;
  }

  rep.in_region_d = in_region_d(src, d, cfg.region_tol);

  if (d.d1 >= src.q11().trace() && d.d2 >= src.q22().trace()) {
    rep.branch = Branch::ZeroRate;
    rep.sigma = ErrorCovariance(src.q(), p1, p2);
    rep.rate_nats = 0.0;
    KktCertificate cert;
    cert.theta = 0.5 * linalg::symmetrize(src.q().llt().solve(Matrix::Identity(n, n)));
    rep.certificate = kkt_residuals(src, rep.sigma, d, cert);
  } else if (rep.in_region_d && !cfg.force_interior_point) {
    rep.branch = Branch::ClosedFormInteriorD;
    rep.sigma = closed_form_candidate(src, d);
    bool ok = false;
    const double ld_q = linalg::log_det_spd(src.q(), &ok);
    rep.rate_nats = 0.5 * (ld_q - p1 * std::log(d.d1 / p1) - p2 * std::log(d.d2 / p2));
    KktCertificate cert;
    cert.lambda1 = p1 / (2.0 * d.d1);
    cert.lambda2 = p2 / (2.0 * d.d2);
    cert.theta = Matrix::Zero(n, n);
    rep.certificate = kkt_residuals(src, rep.sigma, d, cert);
  } else {
    rep.branch = Branch::InteriorPoint;
    const detail::BarrierResult br = detail::run_barrier(src.q(), p1, p2, d.d1, d.d2, cfg);
    rep.iterations = br.newton_steps;

    // Polish: snap the near-null eigenvalues of Q - Sigma to exactly zero and
    // refit the multipliers on that face.
    const auto eig = linalg::sym_eig_desc(br.slack);
    const double snap = cfg.boundary_snap_tol * src.spectral_norm();
    std::vector<int> active;
    Matrix lift = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      if (eig.values(k) <= snap) {
        active.push_back(k);
        lift += std::max(eig.values(k), 0.0) * eig.vectors.col(k) *
                eig.vectors.col(k).transpose();
      }
    }
    Matrix sigma = br.sigma;
    bool snapped_ok = false;
    Matrix range_proj = Matrix::Identity(n, n);
    for (int k : active) range_proj -= eig.vectors.col(k) * eig.vectors.col(k).transpose();
    const Matrix snapped = trim_traces(linalg::symmetrize(br.sigma + lift), range_proj, p1, p2, d);
    const ErrorCovariance snapped_cov(snapped, p1, p2);
    if (snapped_cov.trace1() <= d.d1 + 1e-9 && snapped_cov.trace2() <= d.d2 + 1e-9 &&
        linalg::min_eigenvalue(snapped) > 0.0) {
      sigma = snapped;
      snapped_ok = true;
    }
    Matrix null_basis(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) null_basis.col(c) = eig.vectors.col(active[c]);
    auto worst = [](const KktCertificate& c) {
      return std::max(c.stationarity_residual, c.max_slackness());
    };
    rep.sigma = ErrorCovariance(sigma, p1, p2);
    rep.certificate = kkt_residuals(src, rep.sigma, d, fit_multipliers(sigma, null_basis, p1, p2));

    // Newton refinement on the detected face.
    if (snapped_ok) {
      const auto rank = n - static_cast<Eigen::Index>(active.size());
      Matrix factor(n, rank);
      for (int k = 0, c = 0; k < n; ++k)
        if (std::find(active.begin(), active.end(), k) == active.end())
          factor.col(c++) = std::sqrt(eig.values(k)) * eig.vectors.col(k);
      const std::array<bool, 2> tight = {
          d.d1 - rep.sigma.trace1() <= 1e-6 * std::max(1.0, d.d1),
          d.d2 - rep.sigma.trace2() <= 1e-6 * std::max(1.0, d.d2)};
      const FaceSolution face = refine_on_face(src.q(), factor, p1, p2, d, tight,
                                               {rep.certificate.lambda1, rep.certificate.lambda2});
      if (face.ok) {
        const ErrorCovariance refined(face.sigma, p1, p2);
        const KktCertificate cert = kkt_residuals(
            src, refined, d, fit_multipliers(face.sigma, face.null_basis, p1, p2));
        if (refined.trace1() <= d.d1 + 1e-9 && refined.trace2() <= d.d2 + 1e-9 &&
            linalg::min_eigenvalue(src.q() - face.sigma) >= -1e-12 * src.spectral_norm() &&
            worst(cert) < worst(rep.certificate)) {
          rep.sigma = refined;
          rep.certificate = cert;
        }
      }
    }

    // Barrier duals lambda_i = 1/(t s_i), Theta = (1/t) (Q - Sigma)^{-1} as a
    // fallback when the fit is worse.
    KktCertificate barrier;
    barrier.lambda1 = 1.0 / (br.t * br.s1);
    barrier.lambda2 = 1.0 / (br.t * br.s2);
    barrier.theta = linalg::symmetrize(br.slack.llt().solve(Matrix::Identity(n, n))) / br.t;
    barrier = kkt_residuals(src, rep.sigma, d, barrier);
    if (worst(barrier) < worst(rep.certificate)) rep.certificate = barrier;
    rep.rate_nats = rate_of(src, rep.sigma);
  }

  finish_report(src, d, rep);
  rep.wall_time = std::chrono::steady_clock::now() - start;
  return rep;
}

}  // namespace jointrdf
