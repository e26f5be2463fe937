#pragma once

#include <array>
#include <vector>

#include "jointrdf/linalg.hpp"
#include "jointrdf/model.hpp"

namespace jointrdf {

/// Index partition (p11, p12, p13, p21, p22, p23) of the canonical variable
/// form: p11 unit correlations, p12 correlations in (0,1), p13 uncorrelated.
struct CanonicalPartition {
  int p11 = 0, p12 = 0, p13 = 0;
  int p21 = 0, p22 = 0, p23 = 0;

  std::array<int, 6> as_array() const { return {p11, p12, p13, p21, p22, p23}; }
};

/// Canonical variable form of a joint covariance: S1 Q11 S1^T = I,
/// S2 Q22 S2^T = I and S1 Q12 S2^T = D3 = Block-diag(I, D4, 0).
struct CanonicalForm {
  Matrix s1;
  Matrix s2;
  Vector d1_vals;  // eigenvalues of Q11, descending
  Vector d2_vals;  // eigenvalues of Q22, descending
  Vector d4_vals;  // canonical correlations strictly inside (0,1), descending
  Vector singular_values;  // all singular values of the normalized cross block
  CanonicalPartition partition;
  Matrix d3;     // p1 x p2
  Matrix q_cvf;  // (I, D3; D3^T, I)

  int p1() const { return static_cast<int>(d1_vals.size()); }
  int p2() const { return static_cast<int>(d2_vals.size()); }
};

struct CanonicalTolerances {
  double unit = 1e-9;  // singular values >= 1 - unit count as 1
  double zero = 1e-9;  // singular values <= zero count as 0
};

/// Three-step transformation to canonical variable form. Requires Q11 and
/// Q22 positive definite; throws Error(Singular) otherwise.
CanonicalForm to_canonical_form(const GaussianPairSource& src,
                                CanonicalTolerances tol = {});

/// Same transformation applied to an arbitrary symmetric (p1+p2) matrix,
/// e.g. an error covariance.
CanonicalForm to_canonical_form(const Matrix& joint, int p1, int p2,
                                CanonicalTolerances tol = {});

/// -1/2 sum ln(1 - d4_i^2); equals I(X1;X2) when no unit correlations exist.
double canonical_mutual_information(const CanonicalForm& cf);

/// |det(Q11) det(Q22) prod(1 - d4_i^2) / det(Q) - 1|.
double determinant_identity_residual(const GaussianPairSource& src,
                                     const CanonicalForm& cf);

/// 1/2 ln[ det(D1) det(D2) det(Q_cvf) / (det(D1') det(D2') det(Sigma_cvf)) ]
/// where the primed quantities come from the error covariance's form.
/// Refuses sources with unit canonical correlations (InvalidInput) and error
/// covariances with unit canonical correlations (Singular).
double cvf_objective(const CanonicalForm& src_cvf, const CanonicalForm& err_cvf);

}  // namespace jointrdf
