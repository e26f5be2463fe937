#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "jointrdf/canonical.hpp"
#include "jointrdf/error.hpp"
#include "jointrdf/solver.hpp"
#include "test_support.hpp"

using namespace jointrdf;
using namespace jointrdf::testing;

namespace {

void expect_invariants(const GaussianPairSource& src, const CanonicalForm& cf) {
  const int p1 = src.p1(), p2 = src.p2();
  EXPECT_LE((cf.s1 * src.q11() * cf.s1.transpose() - Matrix::Identity(p1, p1)).norm(), 1e-9);
  EXPECT_LE((cf.s2 * src.q22() * cf.s2.transpose() - Matrix::Identity(p2, p2)).norm(), 1e-9);
  EXPECT_LE((cf.s1 * src.q12() * cf.s2.transpose() - cf.d3).norm(), 1e-9);
  for (Eigen::Index i = 0; i < cf.d4_vals.size(); ++i) {
    EXPECT_GT(cf.d4_vals(i), 0.0);
    EXPECT_LT(cf.d4_vals(i), 1.0);
    if (i > 0) EXPECT_GE(cf.d4_vals(i - 1), cf.d4_vals(i));
  }
  for (Eigen::Index i = 1; i < cf.d1_vals.size(); ++i) EXPECT_GE(cf.d1_vals(i - 1), cf.d1_vals(i));
  for (Eigen::Index i = 1; i < cf.d2_vals.size(); ++i) EXPECT_GE(cf.d2_vals(i - 1), cf.d2_vals(i));
  const auto& part = cf.partition;
  EXPECT_EQ(part.p11, part.p21);
  EXPECT_EQ(part.p12, part.p22);
  EXPECT_EQ(part.p11 + part.p12 + part.p13, p1);
  EXPECT_EQ(part.p21 + part.p22 + part.p23, p2);
}

}  // namespace

TEST(CanonicalForm, IdentitySource) {
  const GaussianPairSource src(Matrix::Identity(5, 5), 2, 3);
  const auto cf = to_canonical_form(src);
  expect_invariants(src, cf);
  EXPECT_EQ(cf.d4_vals.size(), 0);
  EXPECT_EQ(cf.partition.as_array(), (std::array<int, 6>{0, 0, 2, 0, 0, 3}));
  EXPECT_LE((cf.s1 * cf.s1.transpose() - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LE((cf.s2 * cf.s2.transpose() - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(CanonicalForm, ScalarCorrelation) {
  Matrix q(2, 2);
  q << 1.0, 0.5, 0.5, 1.0;
  const GaussianPairSource src(q, 1, 1);
  const auto cf = to_canonical_form(src);
  ASSERT_EQ(cf.d4_vals.size(), 1);
  EXPECT_NEAR(cf.d4_vals(0), 0.5, 1e-14);
  EXPECT_NEAR(std::abs(cf.s1(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(cf.s2(0, 0)), 1.0, 1e-14);
}

TEST(CanonicalForm, ReferenceMatrix) {
  const auto src = reference_source();
  const auto cf = to_canonical_form(src);
  expect_invariants(src, cf);
  EXPECT_EQ(cf.partition.as_array(), (std::array<int, 6>{0, 2, 0, 0, 2, 0}));
  // Canonical correlations computed independently (scipy sqrtm + svd).
  EXPECT_NEAR(cf.d4_vals(0), 0.58752447, 1e-8);
  EXPECT_NEAR(cf.d4_vals(1), 0.27088246, 1e-8);
  EXPECT_NEAR(canonical_mutual_information(cf), mutual_information(src), 1e-10);
  EXPECT_LE(determinant_identity_residual(src, cf), 1e-10);
}

TEST(CanonicalForm, DeterministicSigns) {
  const auto a = to_canonical_form(reference_source());
  const auto b = to_canonical_form(reference_source());
  EXPECT_EQ(a.s1, b.s1);
  EXPECT_EQ(a.s2, b.s2);
}

TEST(CanonicalForm, UnitCorrelationClassified) {
  // X2 = X1 exactly in one coordinate.
  Matrix q = Matrix::Identity(4, 4);
  q(0, 2) = q(2, 0) = 1.0;
  q(1, 3) = q(3, 1) = 0.3;
  const GaussianPairSource src(q, 2, 2);
  const auto cf = to_canonical_form(src);
  EXPECT_EQ(cf.partition.as_array(), (std::array<int, 6>{1, 1, 0, 1, 1, 0}));
  EXPECT_THROW(cvf_objective(cf, cf), Error);
}

TEST(CanonicalForm, SingularMarginalRejected) {
  Matrix q = Matrix::Identity(4, 4);
  q(0, 0) = q(1, 1) = q(0, 1) = q(1, 0) = 1.0;
  try {
    to_canonical_form(Matrix(q), 2, 2);
    FAIL() << "expected singular marginal";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Singular);
  }
}

TEST(CanonicalForm, RandomSourcesInvariantsAndRoundTrip) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto src = random_source(rng, 3);
    const auto cf = to_canonical_form(src);
    expect_invariants(src, cf);
    const Matrix s1_inv = cf.s1.inverse(), s2_inv = cf.s2.inverse();
    EXPECT_LE((s1_inv * s1_inv.transpose() - src.q11()).norm(), 1e-8);
    EXPECT_LE((s2_inv * s2_inv.transpose() - src.q22()).norm(), 1e-8);
    EXPECT_LE((s1_inv * cf.d3 * s2_inv.transpose() - src.q12()).norm(), 1e-8);
    EXPECT_LE(determinant_identity_residual(src, cf), 1e-8);
  }
}

TEST(CvfObjective, ScaledSourceHasSameCorrelations) {
  const auto src = reference_source();
  const auto src_cf = to_canonical_form(src);
  for (double alpha : {0.1, 0.5, 0.9}) {
    const auto err_cf = to_canonical_form(Matrix(alpha * src.q()), 2, 2);
    EXPECT_NEAR(cvf_objective(src_cf, err_cf), 0.5 * std::log(1.0 / std::pow(alpha, 4)), 1e-12);
  }
}

TEST(CvfObjective, MatchesDeterminantRatioAtReferenceOptima) {
  const auto src = reference_source();
  const auto src_cf = to_canonical_form(src);
  for (auto [d1, d2] : {std::pair{0.4, 0.5}, std::pair{1.65, 1.85}}) {
    const auto rep = solve(src, DistortionPair(d1, d2));
    const auto err_cf = to_canonical_form(rep.sigma.sigma(), 2, 2);
    const double direct = 0.5 * (std::log(src.q().determinant()) -
                                 std::log(rep.sigma.sigma().determinant()));
    EXPECT_NEAR(cvf_objective(src_cf, err_cf), direct, 1e-8);
  }
}

TEST(CvfObjective, MatchesRateForRandomFeasibleSigma) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const auto src = random_source(rng, 3);
    const auto src_cf = to_canonical_form(src);
    const Matrix root = linalg::psd_factor(src.q());
    for (int k = 0; k < 100; ++k) {
      // Sigma = Q^{1/2} C Q^{1/2} with 0 < C < I is feasible for Q - Sigma >= 0.
      const Matrix a = random_gaussian(rng, src.dim(), src.dim());
      Eigen::SelfAdjointEigenSolver<Matrix> es(a * a.transpose());
      Vector c(src.dim());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = uniform(rng, 0.05, 0.95);
      const Matrix inner = es.eigenvectors() * c.asDiagonal() * es.eigenvectors().transpose();
      const Matrix sigma = root * inner * root.transpose();
      const auto err_cf = to_canonical_form(sigma, src.p1(), src.p2());
      EXPECT_NEAR(cvf_objective(src_cf, err_cf),
                  rate_of(src, ErrorCovariance(sigma, src.p1(), src.p2())), 1e-8);
    }
  }
}
