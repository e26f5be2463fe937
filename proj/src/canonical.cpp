#include "jointrdf/canonical.hpp"

#include <cmath>
#include <sstream>

#include "jointrdf/error.hpp"

namespace jointrdf {

namespace {

constexpr double kSingularMarginalTol = 1e-12;

void require_pd_marginal(const Vector& d, const char* name) {
  if (d.size() == 0 || !(d(d.size() - 1) > kSingularMarginalTol * d(0))) {
    std::ostringstream os;
    os << name << " is singular (smallest eigenvalue "
       << (d.size() ? d(d.size() - 1) : 0.0) << ")";
    throw Error(ErrorKind::Singular, os.str());
  }
}

double sum_log1m_sq(const Vector& d4) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < d4.size(); ++i) s += std::log1p(-d4(i) * d4(i));
  return s;
}

}  // namespace

CanonicalForm to_canonical_form(const Matrix& joint, int p1, int p2,
                                CanonicalTolerances tol) {
  if (joint.rows() != p1 + p2 || joint.cols() != p1 + p2) {
    throw Error(ErrorKind::InvalidInput, "canonical form: dimension mismatch");
  }
  const Matrix q = linalg::symmetrize(joint);
  CanonicalForm cf;

  // Step 1: Q_Xi = Ui Di Ui^T.
  const auto e1 = linalg::sym_eig_desc(q.topLeftCorner(p1, p1));
  const auto e2 = linalg::sym_eig_desc(q.bottomRightCorner(p2, p2));
  require_pd_marginal(e1.values, "Q_X1");
  require_pd_marginal(e2.values, "Q_X2");
  cf.d1_vals = e1.values;
  cf.d2_vals = e2.values;

  const Vector inv_root1 = e1.values.cwiseSqrt().cwiseInverse();
  const Vector inv_root2 = e2.values.cwiseSqrt().cwiseInverse();
  const Matrix w1 = inv_root1.asDiagonal() * e1.vectors.transpose();
  const Matrix w2 = inv_root2.asDiagonal() * e2.vectors.transpose();

  // Step 2: SVD of the whitened cross covariance.
  const Matrix cross = w1 * q.topRightCorner(p1, p2) * w2.transpose();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u3 = svd.matrixU();
  Matrix u4 = svd.matrixV();
  cf.singular_values = svd.singularValues();
  const Eigen::Index k = cf.singular_values.size();
  const Vector signs = linalg::normalize_column_signs(u3);
  for (Eigen::Index j = 0; j < k; ++j) u4.col(j) *= signs(j);
  if (u4.cols() > k) {
    Matrix tail = u4.rightCols(u4.cols() - k);
    linalg::normalize_column_signs(tail);
    u4.rightCols(u4.cols() - k) = tail;
  }

  int n_unit = 0, n_mid = 0;
  std::vector<double> mids;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double s = cf.singular_values(i);
    if (s >= 1.0 - tol.unit) {
      ++n_unit;
    } else if (s > tol.zero) {
      ++n_mid;
      mids.push_back(s);
    }
  }
  cf.d4_vals = Eigen::Map<const Vector>(mids.data(), static_cast<Eigen::Index>(mids.size()));
  cf.partition = {n_unit, n_mid, p1 - n_unit - n_mid,
                  n_unit, n_mid, p2 - n_unit - n_mid};

  cf.d3 = Matrix::Zero(p1, p2);
  for (int i = 0; i < n_unit; ++i) cf.d3(i, i) = 1.0;
  for (int i = 0; i < n_mid; ++i) cf.d3(n_unit + i, n_unit + i) = mids[i];

  // Step 3: assemble transforms and the canonical covariance.
  cf.s1 = u3.transpose() * w1;
  cf.s2 = u4.transpose() * w2;
  cf.q_cvf = Matrix::Identity(p1 + p2, p1 + p2);
  cf.q_cvf.topRightCorner(p1, p2) = cf.d3;
  cf.q_cvf.bottomLeftCorner(p2, p1) = cf.d3.transpose();
  return cf;
}

CanonicalForm to_canonical_form(const GaussianPairSource& src,
                                CanonicalTolerances tol) {
  return to_canonical_form(src.q(), src.p1(), src.p2(), tol);
}

double canonical_mutual_information(const CanonicalForm& cf) {
  return -0.5 * sum_log1m_sq(cf.d4_vals);
}

double determinant_identity_residual(const GaussianPairSource& src,
                                     const CanonicalForm& cf) {
  bool ok = false;
  const double ld = linalg::log_det_spd(src.q(), &ok);
  if (!ok) throw Error(ErrorKind::Singular, "determinant identity: singular Q");
  const double rhs = cf.d1_vals.array().log().sum() +
                     cf.d2_vals.array().log().sum() + sum_log1m_sq(cf.d4_vals);
  return std::abs(std::expm1(rhs - ld));
}

double cvf_objective(const CanonicalForm& src_cvf, const CanonicalForm& err_cvf) {
  if (src_cvf.partition.p11 > 0) {
    std::ostringstream os;
    os << "source has " << src_cvf.partition.p11
       << " unit canonical correlation(s); the canonical objective needs p11 = 0";
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  if (err_cvf.partition.p11 > 0) {
    throw Error(ErrorKind::Singular,
                "error covariance has a unit canonical correlation");
  }
  if (src_cvf.p1() != err_cvf.p1() || src_cvf.p2() != err_cvf.p2()) {
    throw Error(ErrorKind::InvalidInput, "canonical forms differ in dimension");
  }
  const double num = src_cvf.d1_vals.array().log().sum() +
                     src_cvf.d2_vals.array().log().sum() +
                     sum_log1m_sq(src_cvf.d4_vals);
  const double den = err_cvf.d1_vals.array().log().sum() +
                     err_cvf.d2_vals.array().log().sum() +
                     sum_log1m_sq(err_cvf.d4_vals);
  return 0.5 * (num - den);
}

}  // namespace jointrdf
