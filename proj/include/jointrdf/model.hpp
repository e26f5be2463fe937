#pragma once

#include "jointrdf/linalg.hpp"

namespace jointrdf {

/// Joint covariance of a zero-mean Gaussian pair (X1, X2) with X1 in R^p1 and
/// X2 in R^p2. Immutable after construction; the constructor validates.
class GaussianPairSource {
 public:
  /// Throws Error(InvalidInput) on a dimension mismatch, asymmetry beyond
  /// 1e-12 relative, or an eigenvalue below -1e-10 * ||q||_2. Small negative
  /// eigenvalues are clipped to zero.
  GaussianPairSource(const Matrix& raw, int p1, int p2);

  int p1() const { return p1_; }
  int p2() const { return p2_; }
  int dim() const { return p1_ + p2_; }

  const Matrix& q() const { return q_; }
  Matrix q11() const { return q_.topLeftCorner(p1_, p1_); }
  Matrix q22() const { return q_.bottomRightCorner(p2_, p2_); }
  Matrix q12() const { return q_.topRightCorner(p1_, p2_); }

  bool positive_definite() const { return positive_definite_; }
  double spectral_norm() const { return norm_; }

 private:
  Matrix q_;
  int p1_;
  int p2_;
  bool positive_definite_ = false;
  double norm_ = 0.0;
};

/// Per-block squared-error budget (Delta1, Delta2).
struct DistortionPair {
  double d1 = 0.0;
  double d2 = 0.0;

  DistortionPair() = default;
  DistortionPair(double d1_, double d2_);

  bool has_zero() const { return d1 == 0.0 || d2 == 0.0; }
};

GaussianPairSource validate_source(const Matrix& raw, int p1, int p2);

/// I(X1;X2) in nats. Requires q positive definite.
double mutual_information(const GaussianPairSource& src);

/// Gaussian RDF of a single vector source under trace distortion, by reverse
/// water-filling. Returns +infinity for delta = 0 against a nonzero cov.
double marginal_rdf(const Matrix& cov, double delta);

/// Water level theta with sum_j min(theta, mu_j) = min(delta, trace(cov)).
double water_level(const Vector& eigenvalues, double delta);

/// R_X1(d1) + R_X2(d2) - I(X1;X2). May be negative.
double gray_lower_bound(const GaussianPairSource& src, const DistortionPair& d);

}  // namespace jointrdf
