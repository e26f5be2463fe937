#include "jointrdf/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "jointrdf/error.hpp"

namespace jointrdf::io {

double convert_rate(double nats, RateUnit unit) {
  return unit == RateUnit::Bits ? nats / std::numbers::ln2 : nats;
}

RateUnit parse_rate_unit(const std::string& s) {
  if (s == "nats") return RateUnit::Nats;
  if (s == "bits") return RateUnit::Bits;
  throw Error(ErrorKind::InvalidInput, "unknown rate unit '" + s + "'");
}

std::string to_string(RateUnit unit) {
  return unit == RateUnit::Bits ? "bits" : "nats";
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorKind::InvalidInput, "matrix rows must have equal length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!row.at(k).is_number()) throw Error(ErrorKind::InvalidInput, "matrix entry is not a number");
      m(i, k) = row.at(k).get<double>();
    }
  }
  return m;
}

json source_to_json(const GaussianPairSource& src) {
  return {{"p1", src.p1()}, {"p2", src.p2()}, {"Q", matrix_to_json(src.q())}};
}

GaussianPairSource source_from_json(const json& j) {
  try {
    return GaussianPairSource(matrix_from_json(j.at("Q")), j.at("p1").get<int>(),
                              j.at("p2").get<int>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("source JSON: ") + e.what());
  }
}

GaussianPairSource load_source(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
  }
  return source_from_json(j);
}

namespace {

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

json report_to_json(const SolveReport& rep, RateUnit unit) {
  const auto& c = rep.certificate;
  json cert = {
      {"lambda1", c.lambda1},
      {"lambda2", c.lambda2},
      {"theta", matrix_to_json(c.theta.size() ? c.theta : Matrix())},
      {"stationarity_residual", c.stationarity_residual},
      {"slackness_residuals", c.slackness_residuals},
      {"theta_min_eig", c.theta_min_eig},
      {"dual_feasible", c.dual_feasible},
  };
  return {
      {"branch", to_string(rep.branch)},
      {"unit", to_string(unit)},
      {"rate", finite_or_null(convert_rate(rep.rate_nats, unit))},
      {"rate_nats", finite_or_null(rep.rate_nats)},
      {"infinite_rate", rep.infinite_rate()},
      {"gray_bound", finite_or_null(convert_rate(rep.gray_bound_nats, unit))},
      {"in_region_d", rep.in_region_d},
      {"sigma", matrix_to_json(rep.sigma.sigma())},
      {"slack_min_eig", rep.slack_min_eig},
      {"kkt", cert},
      {"iterations", rep.iterations},
      {"wall_time_s", rep.wall_time.count()},
  };
}

json realization_to_json(const TestChannelRealization& r) {
  return {{"H", matrix_to_json(r.h)}, {"Qv", matrix_to_json(r.qv)}};
}

TestChannelRealization realization_from_json(const json& j,
                                             const GaussianPairSource& src) {
  try {
    TestChannelRealization r{matrix_from_json(j.at("H")), matrix_from_json(j.at("Qv")), src};
    const Eigen::Index n = src.dim();
    if (r.h.rows() != n || r.h.cols() != n || r.qv.rows() != n || r.qv.cols() != n) {
      throw Error(ErrorKind::InvalidInput, "realization JSON: dimension mismatch");
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("realization JSON: ") + e.what());
  }
}

json canonical_to_json(const CanonicalForm& cf) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {
      {"S1", matrix_to_json(cf.s1)},
      {"S2", matrix_to_json(cf.s2)},
      {"d1", vec(cf.d1_vals)},
      {"d2", vec(cf.d2_vals)},
      {"d4", vec(cf.d4_vals)},
      {"singular_values", vec(cf.singular_values)},
      {"partition", cf.partition.as_array()},
  };
}

json condition1_to_json(const Condition1Report& c) {
  return {{"deviation", c.deviation}, {"pass", c.pass}, {"rank", c.rank},
          {"full_rank", c.full_rank}};
}

json distortion_check_to_json(const DistortionCheck& c) {
  return {{"d_hat1", c.d_hat1}, {"d_hat2", c.d_hat2}, {"limit1", c.limit1},
          {"limit2", c.limit2}, {"pass", c.pass}};
}

json cm_report_to_json(const CmOptimalityReport& c) {
  json alts = json::array();
  for (const auto& a : c.alternatives) {
    alts.push_back({{"mse", a.mse}, {"margin", a.margin}, {"slack", a.slack}, {"pass", a.pass}});
  }
  return {{"cm_mse", c.cm_mse}, {"alternatives", alts}, {"pass", c.pass}};
}

}  // namespace jointrdf::io
