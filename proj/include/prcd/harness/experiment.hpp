#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "prcd/analysis.hpp"
#include "prcd/error.hpp"
#include "prcd/harness/config.hpp"
#include "prcd/harness/problems.hpp"
#include "prcd/solver.hpp"

namespace prcd {

/// High-accuracy reference solution from the deterministic full method.
struct Reference {
  std::vector<double> x;
  double f_star = 0.0;
  double mapping_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

inline Reference compute_reference(const CompositeProblem& problem, double tolerance, std::size_t max_iters) {
  SolverConfig c;
  c.mode = SolverMode::FullProxGrad;
  c.stop = StopRule::MappingNorm;
  c.tolerance = tolerance;
  c.max_iters = max_iters;
  c.check_stride = 1;
  c.log_stride = 0;
  c.record_mapping_norm = false;
  const std::vector<double> x0(problem.dimension(), 0.0);
  auto r = run(problem, c, x0);
  refresh_state(problem, r.state, true);
  Reference ref;
  ref.mapping_norm = mapping_norm(problem, r.state);
  ref.x = std::move(r.state.x);
  ref.f_star = r.state.objective;
  ref.iterations = r.state.iteration;
  ref.converged = r.status == RunStatus::Converged;
  return ref;
}

/// Result of one (mode, tau, seed) cell.
struct CellResult {
  SolverMode mode = SolverMode::PRCD;
  std::size_t tau = 1;
  std::uint64_t seed = 1;
  RunStatus status = RunStatus::IterationLimit;
  std::string error;  // non-empty if the cell failed
  std::size_t iterations = 0;
  double normalized_updates = 0.0;  // coordinate (block) updates / N
  double final_objective = 0.0;
  Trace trace;
};

/// One summary row per tau.
struct SummaryRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double sparsity = 0.0;
  std::size_t omega_bar = 0;
  std::size_t omega = 0;
  std::size_t tau = 0;
  double tauk_prcd = std::numeric_limits<double>::quiet_NaN();
  double tauk_pcdm1 = std::numeric_limits<double>::quiet_NaN();
  std::size_t prcd_converged = 0;
  std::size_t pcdm1_converged = 0;
  std::size_t runs_per_mode = 0;
  double f_star = 0.0;
};

struct ExperimentResult {
  ProblemData data;
  Reference reference;
  double gap0 = 0.0;
  double radius = 0.0;  // |x0 - x*|_W
  std::size_t num_blocks = 0;
  std::size_t omega = 0;
  std::size_t omega_bar = 0;
  std::vector<CellResult> cells;
  std::vector<SummaryRow> summary;
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Runs a single cell: the configured mode from x0 = 0 until F - F* <= tolerance.
inline CellResult run_cell(const CompositeProblem& problem, const ExperimentConfig& config, SolverMode mode,
                           std::size_t tau, std::uint64_t seed, double f_star, double gap_tolerance) {
  CellResult cell;
  cell.mode = mode;
  cell.tau = mode == SolverMode::FullProxGrad ? problem.num_blocks() : tau;
  cell.seed = seed;
  const std::size_t N = problem.num_blocks();
  SolverConfig sc;
  sc.mode = mode;
  sc.sampler = SamplerConfig{config.scheme, cell.tau, seed};
  sc.max_iters = config.max_iters;
  sc.stop = StopRule::Gap;
  sc.tolerance = gap_tolerance;
  sc.f_star = f_star;
  sc.workers = 1;
  sc.log_stride = config.log_stride > 0 ? config.log_stride : std::max<std::size_t>(1, (N + cell.tau - 1) / cell.tau);
  const std::vector<double> x0(problem.dimension(), 0.0);
  auto r = run(problem, sc, x0);
  cell.status = r.status;
  cell.iterations = r.state.iteration;
  cell.normalized_updates = static_cast<double>(r.state.coordinate_updates) / static_cast<double>(N);
  cell.final_objective = r.state.objective;
  cell.trace = std::move(r.trace);
  if (!config.timing) {
    for (auto& rec : cell.trace) rec.elapsed_seconds = 0.0;
  }
  return cell;
}

/// Per-iteration CSV: k, tau_k_over_n, gap, mapping_norm, bound, elapsed.
/// `bound` is the sublinear expected-gap envelope for this tau.
inline void write_trace_csv(std::ostream& out, const CellResult& cell, const ExperimentResult& ex) {
  out << "k,tau_k_over_n,gap,mapping_norm,bound,elapsed\n";
  RateBundle b;
  b.num_blocks = ex.num_blocks;
  b.tau = cell.tau;
  b.radius = ex.radius;
  b.gap0 = std::max(0.0, ex.gap0);
  for (const auto& r : cell.trace) {
    out << r.iteration << ',' << detail::format_double(static_cast<double>(r.coordinate_updates) / ex.num_blocks)
        << ',' << detail::format_double(r.objective - ex.reference.f_star) << ','
        << detail::format_double(r.mapping_norm) << ','
        << detail::format_double(sublinear_bound(b, static_cast<double>(r.iteration))) << ','
        << detail::format_double(r.elapsed_seconds) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const ExperimentResult& ex) {
  out << "n,m,sparsity,omega_bar,omega,tau,tauk_prcd_over_n,tauk_pcdm1_over_n,prcd_converged,pcdm1_converged,"
         "runs,f_star\n";
  for (const auto& s : ex.summary) {
    out << s.n << ',' << s.m << ',' << detail::format_double(s.sparsity) << ',' << s.omega_bar << ',' << s.omega
        << ',' << s.tau << ',' << detail::format_double(s.tauk_prcd) << ',' << detail::format_double(s.tauk_pcdm1)
        << ',' << s.prcd_converged << ',' << s.pcdm1_converged << ',' << s.runs_per_mode << ','
        << detail::format_double(s.f_star) << '\n';
  }
}

inline nlohmann::json summary_json(const ExperimentResult& ex) {
  nlohmann::json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j["f_star"] = ex.reference.f_star;
  j["reference_converged"] = ex.reference.converged;
  j["reference_mapping_norm"] = ex.reference.mapping_norm;
  j["gap0"] = ex.gap0;
  j["radius_w"] = ex.radius;
  j["num_blocks"] = ex.num_blocks;
  j["omega"] = ex.omega;
  j["omega_bar"] = ex.omega_bar;
  j["rows"] = nlohmann::json::array();
  for (const auto& s : ex.summary) {
    j["rows"].push_back({{"n", s.n},
                         {"m", s.m},
                         {"sparsity", s.sparsity},
                         {"omega_bar", s.omega_bar},
                         {"omega", s.omega},
                         {"tau", s.tau},
                         {"tauk_prcd_over_n", num(s.tauk_prcd)},
                         {"tauk_pcdm1_over_n", num(s.tauk_pcdm1)},
                         {"prcd_converged", s.prcd_converged},
                         {"pcdm1_converged", s.pcdm1_converged},
                         {"runs", s.runs_per_mode},
                         {"f_star", s.f_star}});
  }
  j["cells"] = nlohmann::json::array();
  for (const auto& c : ex.cells) {
    j["cells"].push_back({{"mode", to_string(c.mode)},
                          {"tau", c.tau},
                          {"seed", c.seed},
                          {"status", c.error.empty() ? to_string(c.status) : "error"},
                          {"error", c.error},
                          {"iterations", c.iterations},
                          {"tau_k_over_n", c.normalized_updates},
                          {"final_objective", c.final_objective}});
  }
  return j;
}

/// Builds the problem, computes F*, runs every (mode, tau, seed) cell on
/// `workers` threads and aggregates the summary. Cells that fail or hit the
/// iteration cap are reported, not thrown.
inline ExperimentResult run_experiment_in_memory(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult ex;
  ex.data = make_problem_data(config.problem);
  const CompositeProblem problem = build_problem(ex.data);
  ex.num_blocks = problem.num_blocks();
  ex.omega = problem.omega();
  ex.omega_bar = problem.omega_bar();
  for (std::size_t tau : config.taus) {
    if (tau < 1 || tau > ex.num_blocks) {
      throw InputError("tau " + std::to_string(tau) + " outside [1, N] with N = " + std::to_string(ex.num_blocks));
    }
    if (config.scheme == SamplingScheme::PartitionShuffle && ex.num_blocks % tau != 0) {
      throw InputError("partition sampling needs tau to divide N; tau = " + std::to_string(tau));
    }
  }

  ex.reference = compute_reference(problem, config.reference_tolerance, config.reference_max_iters);
  const std::vector<double> x0(problem.dimension(), 0.0);
  const auto start = make_state(problem, x0);
  ex.gap0 = start.objective - ex.reference.f_star;
  ex.radius = w_distance(problem, start.x, ex.reference.x);
  const double gap_tol = config.gap_tolerance * std::max(ex.gap0, 0.0);

  struct Job {
    SolverMode mode;
    std::size_t tau;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t tau : config.taus) {
    for (SolverMode mode : config.modes) {
      for (std::uint64_t seed : config.seeds) jobs.push_back({mode, tau, seed});
    }
  }
  ex.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < jobs.size(); idx = next++) {
      const auto& job = jobs[idx];
      try {
        ex.cells[idx] = run_cell(problem, config, job.mode, job.tau, job.seed, ex.reference.f_star, gap_tol);
      } catch (const std::exception& e) {
        CellResult failed;
        failed.mode = job.mode;
        failed.tau = job.tau;
        failed.seed = job.seed;
        failed.error = e.what();
        ex.cells[idx] = std::move(failed);
      }
    }
  };
  const std::size_t threads = std::min(workers_from_env(config.workers), std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t tau : config.taus) {
    SummaryRow row;
    row.n = problem.dimension();
    row.m = ex.data.kind == ProblemKind::Dual ? ex.data.matrix.cols : ex.data.matrix.rows;
    row.sparsity = static_cast<double>(ex.data.matrix.entries.size()) /
                   (static_cast<double>(ex.data.matrix.rows) * static_cast<double>(ex.data.matrix.cols));
    row.omega_bar = ex.omega_bar;
    row.omega = ex.omega;
    row.tau = tau;
    row.runs_per_mode = config.seeds.size();
    row.f_star = ex.reference.f_star;
    std::vector<double> prcd, pcdm1;
    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
      const auto& c = ex.cells[idx];
      if (jobs[idx].tau != tau || !c.error.empty() || c.status != RunStatus::Converged) continue;
      if (c.mode == SolverMode::PRCD) prcd.push_back(c.normalized_updates);
      if (c.mode == SolverMode::PCDM1Ref) pcdm1.push_back(c.normalized_updates);
    }
    row.prcd_converged = prcd.size();
    row.pcdm1_converged = pcdm1.size();
    row.tauk_prcd = detail::mean_of(prcd);
    row.tauk_pcdm1 = detail::mean_of(pcdm1);
    ex.summary.push_back(row);
  }
  return ex;
}

/// Writes trace_<mode>_tau<tau>_seed<seed>.csv per cell plus summary.csv and summary.json.
inline void write_experiment(const ExperimentResult& ex, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  auto open = [](const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw InputError("cannot write '" + p.string() + "'");
    return out;
  };
  for (const auto& c : ex.cells) {
    if (!c.error.empty()) continue;
    auto out = open(fs::path(dir) / ("trace_" + std::string(to_string(c.mode)) + "_tau" + std::to_string(c.tau) +
                                     "_seed" + std::to_string(c.seed) + ".csv"));
    write_trace_csv(out, c, ex);
  }
  {
    auto out = open(fs::path(dir) / "summary.csv");
    write_summary_csv(out, ex);
  }
  auto out = open(fs::path(dir) / "summary.json");
  out << summary_json(ex).dump(2) << '\n';
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  auto ex = run_experiment_in_memory(config);
  write_experiment(ex, config.output_dir);
  return ex;
}

}  // namespace prcd
