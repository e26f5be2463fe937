#pragma once

#include <Eigen/Dense>

namespace jointrdf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
// descending order and each eigenvector's first nonzero entry positive.
struct SymEig {
  Vector values;
  Matrix vectors;
};

Matrix symmetrize(const Matrix& a);

SymEig sym_eig_desc(const Matrix& a);

double min_eigenvalue(const Matrix& a);
double spectral_norm(const Matrix& a);

// Flips column signs so the first entry with |x| > 1e-12 * max|x| is positive.
// Returns the sign vector applied.
Vector normalize_column_signs(Matrix& m);

// ln det of a symmetric positive-definite matrix; +infinity-free: returns
// false in `ok` when the Cholesky factorization fails.
double log_det_spd(const Matrix& a, bool* ok = nullptr);

// Moore-Penrose pseudoinverse of a symmetric matrix via eigendecomposition.
// Eigenvalues at or below rel_tol * scale are treated as zero.
struct SymPinv {
  Matrix pinv;
  Matrix range_projector;
  int rank = 0;
};
// scale < 0 means the largest |eigenvalue| of a.
SymPinv sym_pinv(const Matrix& a, double rel_tol = 1e-10, double scale = -1.0);

// Symmetric square root factor F with F * F^T = a, negative eigenvalues
// clipped to zero.
Matrix psd_factor(const Matrix& a);

}  // namespace linalg
}  // namespace jointrdf
