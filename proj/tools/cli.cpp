#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "jointrdf/canonical.hpp"
#include "jointrdf/error.hpp"
#include "jointrdf/io.hpp"
#include "jointrdf/realization.hpp"
#include "jointrdf/sim.hpp"

namespace jointrdf::cli {

namespace {

using io::json;

constexpr double kStructuralTol = 1e-8;
constexpr double kMonotoneTol = 1e-8;
constexpr long long kMinVerifySamples = 1000;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Singular: return kInvalidInput;
    case ErrorKind::Infeasible: return kInfeasible;
    case ErrorKind::Numerical: return kFailure;
  }
  return kFailure;
}

AxisSpec parse_axis(const std::string& text) {
  AxisSpec axis;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> axis.min >> c1 >> axis.max >> c2 >> axis.steps) || c1 != ':' || c2 != ':' ||
      !(is >> std::ws).eof()) {
    throw Error(ErrorKind::InvalidInput, "bad grid axis '" + text + "' (want min:max:steps)");
  }
  if (!(axis.min > 0.0) || axis.steps < 1 || axis.max < axis.min ||
      (axis.steps > 1 && !(axis.max > axis.min))) {
    throw Error(ErrorKind::InvalidInput,
                "grid axis '" + text + "' must have 0 < min < max and steps >= 1");
  }
  return axis;
}

std::string format_g12(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Options {
  std::string input;
  double d1 = -1.0;
  double d2 = -1.0;
  std::string unit = "nats";
  std::string output;
  std::string grid;
  long long samples = 1000000;
  std::uint64_t seed = 1;
  int jobs = 0;
  double tamper = 0.0;
  SolverConfig solver;
};

struct Context {
  const Options& opt;
  std::ostream& out;
  std::ostream& err;
};

DistortionPair distortions(const Options& opt) {
  if (opt.d1 < 0.0 || opt.d2 < 0.0) {
    throw Error(ErrorKind::InvalidInput, "--d1 and --d2 are required and must be >= 0");
  }
  return DistortionPair(opt.d1, opt.d2);
}

SolveReport solve_or_throw(const GaussianPairSource& src, const DistortionPair& d,
                           const SolverConfig& cfg) {
  SolveReport rep = solve(src, d, cfg);
  if (rep.branch == Branch::Infeasible) {
    throw Error(ErrorKind::Infeasible,
                "infinite rate: zero distortion against a source block with positive variance");
  }
  return rep;
}

int cmd_solve(const Context& ctx) {
  const auto src = io::load_source(ctx.opt.input);
  const auto d = distortions(ctx.opt);
  const auto unit = io::parse_rate_unit(ctx.opt.unit);
  const SolveReport rep = solve(src, d, ctx.opt.solver);
  if (ctx.opt.output == "csv") {
    ctx.out << csv_header() << '\n'
            << csv_row({d.d1, d.d2, rep.rate_nats, rep.branch, rep.gray_bound_nats,
                        rep.in_region_d},
                       io::convert_rate(1.0, unit))
            << '\n';
  } else {
    ctx.out << io::report_to_json(rep, unit).dump(2) << '\n';
  }
  if (rep.branch == Branch::Infeasible) {
    ctx.err << "infinite rate: zero distortion against a source block with positive variance\n";
    return kInfeasible;
  }
  return kOk;
}

int cmd_sweep(const Context& ctx) {
  const auto src = io::load_source(ctx.opt.input);
  const auto unit = io::parse_rate_unit(ctx.opt.unit);
  const GridSpec grid = parse_grid(ctx.opt.grid);
  const auto rows = run_sweep(src, grid, ctx.opt.solver, ctx.opt.jobs);
  const double scale = io::convert_rate(1.0, unit);
  if (ctx.opt.output == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"d1", r.d1}, {"d2", r.d2}, {"rate", r.rate_nats * scale},
                     {"branch", to_string(r.branch)}, {"gray_bound", r.gray_bound_nats * scale},
                     {"in_region_d", r.in_region_d}});
    }
    ctx.out << json{{"unit", io::to_string(unit)}, {"rows", arr}}.dump(2) << '\n';
  } else {
    ctx.out << csv_header() << '\n';
    for (const auto& r : rows) ctx.out << csv_row(r, scale) << '\n';
  }
  return kOk;
}

int cmd_realize(const Context& ctx) {
  const auto src = io::load_source(ctx.opt.input);
  const auto d = distortions(ctx.opt);
  const SolveReport rep = solve_or_throw(src, d, ctx.opt.solver);

  Matrix used = rep.sigma.sigma();
  if (ctx.opt.tamper != 0.0) {
    used -= ctx.opt.tamper * Matrix::Identity(src.dim(), src.dim());
  }
  json summary;
  bool pass = true;
  json doc = {{"sigma", io::matrix_to_json(rep.sigma.sigma())},
              {"branch", to_string(rep.branch)}};
  try {
    const auto r = realize(src, ErrorCovariance(used, src.p1(), src.p2()));
    const auto c1 = verify_condition1(r, kStructuralTol);
    const Matrix target = c1.full_rank ? Matrix::Identity(src.dim(), src.dim())
                                       : reproduction_range_projector(r);
    const double cm_dev = (conditional_mean_map(r) - target).norm();
    const double err_dev = (implied_error_covariance(r) - rep.sigma.sigma()).norm();
    const auto inv = check_invariants(r);
    const bool inv_ok = inv.symmetry_residual <= kStructuralTol * src.spectral_norm() &&
                        inv.qv_min_eig >= -1e-10 * src.spectral_norm();
    pass = c1.pass && cm_dev <= kStructuralTol && err_dev <= kStructuralTol && inv_ok;
    doc.update(io::realization_to_json(r));
    summary = {{"condition1", io::condition1_to_json(c1)},
               {"conditional_mean_deviation", cm_dev},
               {"error_covariance_deviation", err_dev},
               {"symmetry_residual", inv.symmetry_residual},
               {"qv_min_eig", inv.qv_min_eig},
               {"tolerance", kStructuralTol},
               {"pass", pass}};
  } catch (const Error& e) {
    pass = false;
    summary = {{"error", e.what()}, {"pass", false}};
  }
  doc["verification"] = summary;
  ctx.out << doc.dump(2) << '\n';
  if (!pass) {
    ctx.err << "structural checks failed\n";
    return kStructuralFailure;
  }
  return kOk;
}

int cmd_verify(const Context& ctx) {
  const auto src = io::load_source(ctx.opt.input);
  const auto d = distortions(ctx.opt);
  if (ctx.opt.samples < 1) throw Error(ErrorKind::InvalidInput, "--samples must be >= 1");
  const SolveReport rep = solve_or_throw(src, d, ctx.opt.solver);
  const auto r = realize(src, rep.sigma);

  json doc = {{"generator", CounterNormal::identity()},
              {"seed", ctx.opt.seed},
              {"samples", ctx.opt.samples},
              {"branch", to_string(rep.branch)}};
  if (ctx.opt.samples < kMinVerifySamples) {
    doc["warning"] = "insufficient samples; statistical checks skipped";
    doc["pass"] = nullptr;
    ctx.err << "warning: insufficient samples (" << ctx.opt.samples
            << " < " << kMinVerifySamples << "), checks skipped\n";
    ctx.out << doc.dump(2) << '\n';
    return kOk;
  }

  const auto batch = push_channel(sample_source(src, ctx.opt.samples, ctx.opt.seed), r,
                                  ctx.opt.seed);
  const auto dist = check_distortion(batch, d);

  const int n = src.dim();
  Matrix noise(n, n);
  CounterNormal(ctx.opt.seed ^ 0x5bd1e995ULL).fill(noise, 7);
  const std::vector<Matrix> alternatives = {0.9 * Matrix::Identity(n, n),
                                            1.1 * Matrix::Identity(n, n),
                                            Matrix::Identity(n, n) + 0.1 * noise};
  const auto cm = check_cm_optimality(batch, r, alternatives);
  const Matrix resid_cov = empirical_covariance(batch.e);

  doc["distortion"] = io::distortion_check_to_json(dist);
  doc["cm_optimality"] = io::cm_report_to_json(cm);
  doc["residual_covariance"] = io::matrix_to_json(resid_cov);
  doc["residual_covariance_deviation"] = (resid_cov - rep.sigma.sigma()).norm();
  doc["pass"] = dist.pass && cm.pass;
  ctx.out << doc.dump(2) << '\n';
  if (!(dist.pass && cm.pass)) {
    ctx.err << "statistical checks failed\n";
    return kStatisticalFailure;
  }
  return kOk;
}

int cmd_canonical(const Context& ctx) {
  const auto src = io::load_source(ctx.opt.input);
  const auto cf = to_canonical_form(src);
  json doc = io::canonical_to_json(cf);
  if (src.positive_definite()) {
    doc["determinant_identity_residual"] = determinant_identity_residual(src, cf);
  }
  ctx.out << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

std::vector<double> AxisSpec::values() const {
  std::vector<double> v(steps);
  for (int i = 0; i < steps; ++i) {
    v[i] = steps == 1 ? min : min + (max - min) * i / (steps - 1);
  }
  return v;
}

GridSpec parse_grid(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos) {
    throw Error(ErrorKind::InvalidInput, "grid must be 'd1_min:d1_max:steps,d2_min:d2_max:steps'");
  }
  return {parse_axis(spec.substr(0, comma)), parse_axis(spec.substr(comma + 1))};
}

std::vector<SweepRow> run_sweep(const GaussianPairSource& src, const GridSpec& grid,
                                const SolverConfig& cfg, int jobs) {
  const auto xs = grid.d1.values();
  const auto ys = grid.d2.values();
  const std::size_t total = xs.size() * ys.size();
  std::vector<SweepRow> rows(total);

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failed_index = total;

  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const double d1 = xs[k / ys.size()], d2 = ys[k % ys.size()];
      try {
        const SolveReport rep = solve(src, DistortionPair(d1, d2), cfg);
        rows[k] = {d1, d2, rep.rate_nats, rep.branch, rep.gray_bound_nats, rep.in_region_d};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (k < failed_index) {
          failed_index = k;
          failure = std::current_exception();
        }
      }
    }
  };
  const int workers = std::max(
      1, jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (failure) {
    const double d1 = xs[failed_index / ys.size()], d2 = ys[failed_index % ys.size()];
    std::ostringstream os;
    os << "solve failed at (d1, d2) = (" << d1 << ", " << d2 << "): ";
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      os << e.what();
      throw Error(e.kind(), os.str());
    } catch (const std::exception& e) {
      os << e.what();
      throw Error(ErrorKind::Numerical, os.str());
    }
  }

  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const SweepRow& here = rows[i * ys.size() + j];
      const bool up_d1 = i > 0 && here.rate_nats > rows[(i - 1) * ys.size() + j].rate_nats + kMonotoneTol;
      const bool up_d2 = j > 0 && here.rate_nats > rows[i * ys.size() + j - 1].rate_nats + kMonotoneTol;
      if (up_d1 || up_d2) {
        std::ostringstream os;
        os << "rate increases along the " << (up_d1 ? "d1" : "d2") << " axis at ("
           << here.d1 << ", " << here.d2 << ")";
        throw Error(ErrorKind::Numerical, os.str());
      }
    }
  }
  return rows;
}

std::string csv_header() { return "d1,d2,rate,branch,gray_bound,in_region_d"; }

std::string csv_row(const SweepRow& row, double rate_scale) {
  std::ostringstream os;
  os << format_g12(row.d1) << ',' << format_g12(row.d2) << ','
     << format_g12(row.rate_nats * rate_scale) << ',' << to_string(row.branch) << ','
     << format_g12(row.gray_bound_nats * rate_scale) << ',' << (row.in_region_d ? 1 : 0);
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint rate-distortion function of two correlated Gaussian sources"};
  app.require_subcommand(1);
  Options opt;

  auto add_source = [&](CLI::App* sub) {
    sub->add_option("-i,--input", opt.input, "Source JSON {p1, p2, Q}")->required();
  };
  auto add_distortions = [&](CLI::App* sub) {
    sub->add_option("--d1", opt.d1, "Distortion budget for X1")->required();
    sub->add_option("--d2", opt.d2, "Distortion budget for X2")->required();
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--unit", opt.unit, "Rate unit")->check(CLI::IsMember({"nats", "bits"}));
    sub->add_option("--tol-gap", opt.solver.gap_tol, "Barrier duality-gap target");
    sub->add_option("--tol-newton", opt.solver.newton_tol, "Centering tolerance");
    sub->add_option("--tol-region", opt.solver.region_tol, "Region-D margin (relative)");
    sub->add_option("--tol-snap", opt.solver.boundary_snap_tol, "Boundary snap (relative)");
    sub->add_flag("--force-interior-point", opt.solver.force_interior_point,
                  "Skip the closed-form branch");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Solve one distortion pair");
  add_source(solve_cmd);
  add_distortions(solve_cmd);
  add_solver(solve_cmd);
  solve_cmd->add_option("--output", opt.output, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Solve a distortion grid");
  add_source(sweep_cmd);
  add_solver(sweep_cmd);
  sweep_cmd->add_option("--grid", opt.grid, "d1_min:d1_max:steps,d2_min:d2_max:steps")->required();
  sweep_cmd->add_option("--jobs", opt.jobs, "Worker threads (0 = hardware)");
  sweep_cmd->add_option("--output", opt.output, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* realize_cmd = app.add_subcommand("realize", "Synthesize and verify the optimal test channel");
  add_source(realize_cmd);
  add_distortions(realize_cmd);
  add_solver(realize_cmd);
  realize_cmd->add_option("--debug-tamper-sigma", opt.tamper,
                          "Subtract this multiple of I from sigma before realizing");

  auto* verify_cmd = app.add_subcommand("verify", "Monte-Carlo validation of the test channel");
  add_source(verify_cmd);
  add_distortions(verify_cmd);
  add_solver(verify_cmd);
  verify_cmd->add_option("--samples", opt.samples, "Sample count");
  verify_cmd->add_option("--seed", opt.seed, "Master seed");

  auto* canonical_cmd = app.add_subcommand("canonical", "Canonical variable form of the source");
  add_source(canonical_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidInput;
  }

  const Context ctx{opt, out, err};
  try {
    if (*solve_cmd) return cmd_solve(ctx);
    if (*sweep_cmd) return cmd_sweep(ctx);
    if (*realize_cmd) return cmd_realize(ctx);
    if (*verify_cmd) return cmd_verify(ctx);
    if (*canonical_cmd) return cmd_canonical(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace jointrdf::cli
