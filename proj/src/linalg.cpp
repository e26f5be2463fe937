#include "jointrdf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace jointrdf::linalg {

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Vector normalize_column_signs(Matrix& m) {
  Vector signs = Vector::Ones(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double scale = m.col(j).cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > 1e-12 * scale) {
        if (m(i, j) < 0.0) {
          m.col(j) *= -1.0;
          signs(j) = -1.0;
        }
        break;
      }
    }
  }
  return signs;
}

SymEig sym_eig_desc(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
  const Eigen::Index n = a.rows();
  SymEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // SelfAdjointEigenSolver sorts ascending.
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  normalize_column_signs(out.vectors);
  return out;
}

double min_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double log_det_spd(const Matrix& a, bool* ok) {
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) {
    if (ok) *ok = false;
    return 0.0;
  }
  const Vector diag = llt.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) {
      if (ok) *ok = false;
      return 0.0;
    }
  }
  if (ok) *ok = true;
  return 2.0 * diag.array().log().sum();
}

SymPinv sym_pinv(const Matrix& a, double rel_tol, double scale) {
  const Eigen::Index n = a.rows();
  SymPinv out;
  out.pinv = Matrix::Zero(n, n);
  out.range_projector = Matrix::Zero(n, n);
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
  const Vector& mu = es.eigenvalues();
  const double cutoff = rel_tol * (scale >= 0.0 ? scale : mu.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(mu(k)) <= cutoff || mu(k) == 0.0) continue;
    const Vector v = es.eigenvectors().col(k);
    out.pinv.noalias() += (1.0 / mu(k)) * v * v.transpose();
    out.range_projector.noalias() += v * v.transpose();
    ++out.rank;
  }
  return out;
}

Matrix psd_factor(const Matrix& a) {
  if (a.size() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace jointrdf::linalg
