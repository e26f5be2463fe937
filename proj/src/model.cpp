#include "jointrdf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jointrdf/error.hpp"

namespace jointrdf {

namespace {
constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kWaterTol = 1e-12;
}  // namespace

GaussianPairSource::GaussianPairSource(const Matrix& raw, int p1, int p2)
    : p1_(p1), p2_(p2) {
  if (p1 < 1 || p2 < 1) {
    throw Error(ErrorKind::InvalidInput, "p1 and p2 must be positive");
  }
  const Eigen::Index n = p1 + p2;
  if (raw.rows() != n || raw.cols() != n) {
    std::ostringstream os;
    os << "covariance is " << raw.rows() << "x" << raw.cols() << ", expected "
       << n << "x" << n;
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  if (!raw.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "covariance has non-finite entries");
  }
  const double scale = raw.cwiseAbs().maxCoeff();
  const double asym = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(scale, std::numeric_limits<double>::min())) {
    std::ostringstream os;
    os << "covariance is not symmetric (max |q - q^T| = " << asym << ")";
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  q_ = linalg::symmetrize(raw);
  norm_ = linalg::spectral_norm(q_);

  Eigen::SelfAdjointEigenSolver<Matrix> es(q_);
  const double mu_min = es.eigenvalues()(0);
  if (mu_min < -kPsdTol * norm_) {
    std::ostringstream os;
    os << "covariance has negative eigenvalue " << mu_min;
    throw Error(ErrorKind::InvalidInput, os.str());
  }
  if (mu_min < 0.0) {
    const Vector clipped = es.eigenvalues().cwiseMax(0.0);
    q_ = linalg::symmetrize(es.eigenvectors() * clipped.asDiagonal() *
                            es.eigenvectors().transpose());
  }
  positive_definite_ = mu_min > 0.0;
}

DistortionPair::DistortionPair(double d1_, double d2_) : d1(d1_), d2(d2_) {
  if (!(d1 >= 0.0) || !(d2 >= 0.0) || !std::isfinite(d1) || !std::isfinite(d2)) {
    throw Error(ErrorKind::InvalidInput,
                "distortions must be finite and nonnegative");
  }
}

GaussianPairSource validate_source(const Matrix& raw, int p1, int p2) {
  return GaussianPairSource(raw, p1, p2);
}

double mutual_information(const GaussianPairSource& src) {
  bool ok_q = false, ok_1 = false, ok_2 = false;
  const double ld = linalg::log_det_spd(src.q(), &ok_q);
  const double ld1 = linalg::log_det_spd(src.q11(), &ok_1);
  const double ld2 = linalg::log_det_spd(src.q22(), &ok_2);
  if (!src.positive_definite() || !ok_q || !ok_1 || !ok_2) {
    throw Error(ErrorKind::Singular,
                "mutual information requires a positive-definite covariance");
  }
  return std::max(0.0, 0.5 * (ld1 + ld2 - ld));
}

double water_level(const Vector& eigenvalues, double delta) {
  const Vector mu = eigenvalues.cwiseMax(0.0);
  const double total = mu.sum();
  const double target = std::min(delta, total);
  if (target >= total) return mu.size() ? mu.maxCoeff() : 0.0;
  auto filled = [&](double theta) { return mu.cwiseMin(theta).sum(); };
  double lo = 0.0;
  double hi = mu.maxCoeff();
  double theta = 0.5 * (lo + hi);
  const double tol = kWaterTol * std::max(1.0, delta);
  for (int it = 0; it < 500; ++it) {
    theta = 0.5 * (lo + hi);
    const double f = filled(theta);
    if (std::abs(f - target) <= tol) break;
    if (f < target) {
      lo = theta;
    } else {
      hi = theta;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  return theta;
}

double marginal_rdf(const Matrix& cov, double delta) {
  if (!(delta >= 0.0)) {
    throw Error(ErrorKind::InvalidInput, "distortion must be nonnegative");
  }
  if (cov.rows() != cov.cols()) {
    throw Error(ErrorKind::InvalidInput, "covariance must be square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(cov),
                                           Eigen::EigenvaluesOnly);
  const Vector mu = es.eigenvalues().cwiseMax(0.0);
  const double total = mu.sum();
  if (delta >= total) return 0.0;
  if (delta == 0.0) return std::numeric_limits<double>::infinity();
  const double theta = water_level(mu, delta);
  double rate = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    if (mu(j) > theta) rate += 0.5 * std::log(mu(j) / theta);
  }
  return rate;
}

double gray_lower_bound(const GaussianPairSource& src, const DistortionPair& d) {
  if (d.has_zero()) {
    throw Error(ErrorKind::Infeasible, "Gray bound requires positive distortions");
  }
  return marginal_rdf(src.q11(), d.d1) + marginal_rdf(src.q22(), d.d2) -
         mutual_information(src);
}

}  // namespace jointrdf
