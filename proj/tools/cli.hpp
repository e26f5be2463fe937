#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jointrdf/model.hpp"
#include "jointrdf/solver.hpp"

namespace jointrdf::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kInfeasible = 3,
  kStructuralFailure = 4,
  kStatisticalFailure = 5,
};

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  std::vector<double> values() const;
};

struct GridSpec {
  AxisSpec d1;
  AxisSpec d2;
};

/// Parses "d1_min:d1_max:steps,d2_min:d2_max:steps". Bounds must be positive
/// and increasing; throws Error(InvalidInput).
GridSpec parse_grid(const std::string& spec);

struct SweepRow {
  double d1 = 0.0;
  double d2 = 0.0;
  double rate_nats = 0.0;
  Branch branch = Branch::Infeasible;
  double gray_bound_nats = 0.0;
  bool in_region_d = false;
};

/// Solves every grid point on `jobs` workers. Rows come back ordered by
/// (d1, d2). Throws if a point fails or a rate increases along an axis.
std::vector<SweepRow> run_sweep(const GaussianPairSource& src, const GridSpec& grid,
                                const SolverConfig& cfg, int jobs);

std::string csv_header();
std::string csv_row(const SweepRow& row, double rate_scale);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jointrdf::cli
