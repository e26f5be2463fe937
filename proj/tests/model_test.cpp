#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "jointrdf/canonical.hpp"
#include "jointrdf/error.hpp"
#include "jointrdf/model.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace jointrdf;
using namespace jointrdf::testing;

TEST(ValidateSource, AcceptsReferenceMatrix) {
  const auto src = validate_source(reference_covariance(), 2, 2);
  EXPECT_TRUE(src.positive_definite());
  EXPECT_EQ(src.dim(), 4);
  Matrix rebuilt(4, 4);
  rebuilt << src.q11(), src.q12(), src.q12().transpose(), src.q22();
  EXPECT_EQ(rebuilt, src.q());
}

TEST(ValidateSource, IdentityHasZeroCrossBlock) {
  const auto src = validate_source(Matrix::Identity(4, 4), 2, 2);
  EXPECT_TRUE(src.positive_definite());
  EXPECT_EQ(src.q12(), Matrix::Zero(2, 2));
}

TEST(ValidateSource, RejectsAsymmetry) {
  Matrix q = Matrix::Identity(4, 4);
  q(0, 1) = 1e-3;
  try {
    validate_source(q, 2, 2);
    FAIL() << "expected asymmetry error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(ValidateSource, RejectsDimensionMismatch) {
  EXPECT_THROW(validate_source(Matrix::Identity(4, 4), 2, 3), Error);
  EXPECT_THROW(validate_source(Matrix::Identity(4, 4), 0, 4), Error);
}

TEST(ValidateSource, RejectsNegativeEigenvalue) {
  Matrix q = Matrix::Identity(2, 2);
  q(1, 1) = -1e-3;
  EXPECT_THROW(validate_source(q, 1, 1), Error);
}

TEST(ValidateSource, ClipsRoundoffNegativeEigenvalue) {
  Matrix q(2, 2);
  q << 1.0, 1.0, 1.0, 1.0 - 1e-13;
  const auto src = validate_source(q, 1, 1);
  EXPECT_FALSE(src.positive_definite());
  EXPECT_GE(linalg::min_eigenvalue(src.q()), -1e-15);
}

TEST(Distortion, RejectsNegative) {
  EXPECT_THROW(DistortionPair(-0.1, 1.0), Error);
  EXPECT_TRUE(DistortionPair(0.0, 1.0).has_zero());
}

TEST(MutualInformation, ZeroForIndependentBlocks) {
  Matrix q = Matrix::Zero(3, 3);
  q.diagonal() << 2.0, 1.0, 0.5;
  EXPECT_NEAR(mutual_information(GaussianPairSource(q, 2, 1)), 0.0, 1e-15);
}

TEST(MutualInformation, ScalarCorrelationMatchesCanonicalForm) {
  Matrix q(2, 2);
  q << 1.0, 0.5, 0.5, 1.0;
  const GaussianPairSource src(q, 1, 1);
  const double mi = mutual_information(src);
  EXPECT_NEAR(mi, 0.14384103622589045, 1e-14);  // -1/2 ln(1 - 0.25)
  EXPECT_NEAR(mi, canonical_mutual_information(to_canonical_form(src)), 1e-12);
}

TEST(MutualInformation, ReferenceMatrixMatchesCanonicalForm) {
  const auto src = reference_source();
  const double mi = mutual_information(src);
  // Independently computed with numpy determinants.
  EXPECT_NEAR(mi, 0.24980567671653855, 1e-12);
  EXPECT_NEAR(mi, canonical_mutual_information(to_canonical_form(src)), 1e-10);
}

TEST(MutualInformation, SingularSourceThrows) {
  Matrix q(2, 2);
  q << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(mutual_information(GaussianPairSource(q, 1, 1)), Error);
}

TEST(MutualInformation, NonnegativeAndZeroIffUncorrelated) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto src = random_source(rng, 3);
    EXPECT_GE(mutual_information(src), 0.0);
    Matrix q = src.q();
    q.topRightCorner(src.p1(), src.p2()).setZero();
    q.bottomLeftCorner(src.p2(), src.p1()).setZero();
    EXPECT_NEAR(mutual_information(GaussianPairSource(q, src.p1(), src.p2())), 0.0, 1e-12);
  }
}

TEST(MarginalRdf, BudgetCoversVariance) {
  EXPECT_EQ(marginal_rdf(Matrix::Identity(2, 2), 2.0), 0.0);
  EXPECT_EQ(marginal_rdf(Matrix::Identity(2, 2), 5.0), 0.0);
}

TEST(MarginalRdf, ZeroBudgetIsInfinite) {
  EXPECT_TRUE(std::isinf(marginal_rdf(Matrix::Identity(2, 2), 0.0)));
  EXPECT_EQ(marginal_rdf(Matrix::Zero(2, 2), 0.0), 0.0);
}

TEST(MarginalRdf, WaterLevelBelowBothModes) {
  Matrix cov = Matrix::Zero(2, 2);
  cov.diagonal() << 4.0, 1.0;
  const double expected = 1.3862943611198906;  // 1/2 ln(4/0.5) + 1/2 ln(1/0.5)
  EXPECT_NEAR(oracle::water_filling_rate(cov.diagonal(), 1.0), expected, 1e-10);
  EXPECT_NEAR(marginal_rdf(cov, 1.0), expected, 1e-10);
  EXPECT_NEAR(water_level(cov.diagonal(), 1.0), 0.5, 1e-12);
}

TEST(MarginalRdf, SmallModeFilledFirst) {
  Matrix cov = Matrix::Zero(2, 2);
  cov.diagonal() << 4.0, 0.1;
  const double expected = 0.7458274383888585;  // theta = 0.9, 1/2 ln(4/0.9)
  EXPECT_NEAR(oracle::water_filling_rate(cov.diagonal(), 1.0), expected, 1e-8);
  EXPECT_NEAR(marginal_rdf(cov, 1.0), expected, 1e-8);
}

TEST(MarginalRdf, AgreesWithGridOracleOnRandomMatrices) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 6;
    const Matrix cov = random_spd(rng, n, 0.01);
    const double delta = uniform(rng, 0.01, 1.0) * cov.trace();
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    EXPECT_NEAR(marginal_rdf(cov, delta), oracle::water_filling_rate(es.eigenvalues(), delta), 1e-8);
  }
}

TEST(MarginalRdf, NonIncreasingAndConvexInDelta) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 6;
    Matrix cov = random_spd(rng, n, 0.0);
    if (trial % 4 == 0) {
      // Rank-deficient PSD input.
      const Matrix a = random_gaussian(rng, n, std::max(1, n - 2));
      cov = a * a.transpose();
    }
    const double total = cov.trace();
    std::vector<double> rates;
    const int points = 50;
    const double h = 1.2 * total / points;
    for (int k = 1; k <= points; ++k) rates.push_back(marginal_rdf(cov, k * h));
    for (int k = 1; k < points; ++k) EXPECT_LE(rates[k], rates[k - 1] + 1e-12);
    for (int k = 1; k + 1 < points; ++k)
      EXPECT_LE(rates[k], 0.5 * (rates[k - 1] + rates[k + 1]) + 1e-9);
  }
}

TEST(GrayBound, IndependentBlocksSumMarginals) {
  Matrix q = Matrix::Zero(4, 4);
  q.diagonal() << 3.0, 1.0, 2.0, 0.5;
  const GaussianPairSource src(q, 2, 2);
  const DistortionPair d(0.8, 0.6);
  EXPECT_DOUBLE_EQ(gray_lower_bound(src, d),
                   marginal_rdf(src.q11(), 0.8) + marginal_rdf(src.q22(), 0.6));
}

TEST(GrayBound, RequiresPositiveDistortions) {
  EXPECT_THROW(gray_lower_bound(reference_source(), DistortionPair(0.0, 1.0)), Error);
}
