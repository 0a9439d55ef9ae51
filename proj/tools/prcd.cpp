// Command-line front end: generate, solve, compare, bounds, gebp-fit.
//
// Exit codes: 0 success, 2 input error, 3 structural error, 4 internal error,
// 1 anything else. A solver that stops at its iteration cap is not a failure;
// the status is printed instead.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prcd/analysis.hpp"
#include "prcd/error.hpp"
#include "prcd/gebp.hpp"
#include "prcd/harness/config.hpp"
#include "prcd/harness/experiment.hpp"
#include "prcd/harness/problems.hpp"
#include "prcd/rng.hpp"
#include "prcd/solver.hpp"

namespace {

using nlohmann::json;

/// Flags shared by the subcommands that build a problem or run experiments.
/// Every flag that is given overrides the value from --config.
struct CommonFlags {
  std::string config_path;
  std::string source, kind, pattern, matrix, rhs, sigma_file, center_file, scheme, out;
  std::size_t m = 0, n = 0, samples = 0, group_size = 0, block_size = 0;
  double sparsity = 0, lambda = 0, noise = 0;
  std::vector<double> box, sigma_range;
  std::uint64_t problem_seed = 0;
  std::vector<std::string> modes;
  std::vector<std::size_t> taus;
  std::vector<std::uint64_t> seeds;
  double gap_tol = 0, ref_tol = 0;
  std::size_t max_iters = 0, log_stride = 0, ref_max_iters = 0, workers = 0;
  bool no_timing = false;
  std::vector<CLI::Option*> problem_opts;
  CLI::App* app = nullptr;

  void add_problem(CLI::App* a) {
    app = a;
    a->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    a->add_option("--source", source, "generate-lasso | generate-logistic | generate-dual | load-matrix");
    a->add_option("--kind", kind, "lasso | logistic | dual (load-matrix)");
    a->add_option("--pattern", pattern, "uniform | diagonal | block_angular");
    a->add_option("--matrix", matrix, "coordinate-format matrix file");
    a->add_option("--rhs", rhs, "right-hand side / label vector file");
    a->add_option("--sigma-file", sigma_file, "dual: sigma_j per column");
    a->add_option("--center-file", center_file, "dual: c_j per column");
    a->add_option("-m,--rows", m, "rows (lasso) / primal variables (dual)");
    a->add_option("-n,--cols", n, "columns (lasso, logistic) / constraints (dual)");
    a->add_option("--samples", samples, "logistic sample count");
    a->add_option("--sparsity", sparsity, "fraction of nonzeros in (0, 1]");
    a->add_option("--group-size", group_size, "block_angular group size");
    a->add_option("--lambda", lambda, "L1 weight");
    a->add_option("--box", box, "box bounds: lower upper")->expected(2);
    a->add_option("--block-size", block_size, "coordinates per block");
    a->add_option("--noise", noise, "lasso right-hand side noise level");
    a->add_option("--sigma-range", sigma_range, "dual sigma_j range: min max")->expected(2);
    a->add_option("--problem-seed", problem_seed, "problem generation seed");
  }

  void add_experiment(CLI::App* a) {
    a->add_option("--modes", modes, "solver modes: prcd pcdm1 full");
    a->add_option("--taus", taus, "tau grid");
    a->add_option("--seeds", seeds, "sampling seeds");
    a->add_option("--scheme", scheme, "tau-nice | partition");
    a->add_option("--gap-tol", gap_tol, "stop when F - F* <= gap_tol * (F(x0) - F*)");
    a->add_option("--max-iters", max_iters, "iteration cap per run");
    a->add_option("--log-stride", log_stride, "trace every k iterations (0: ceil(N/tau))");
    a->add_option("--ref-tol", ref_tol, "reference solve mapping-norm tolerance");
    a->add_option("--ref-max-iters", ref_max_iters, "reference solve iteration cap");
    a->add_option("-o,--out", out, "output directory");
    a->add_flag("--no-timing", no_timing, "write 0 in the elapsed column (bit-reproducible CSV)");
    a->add_option("-w,--workers", workers, "parallel experiment cells (env PRCD_WORKERS overrides)");
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  prcd::ExperimentConfig resolve() const {
    prcd::ExperimentConfig c = config_path.empty() ? prcd::ExperimentConfig{} : prcd::load_config(config_path);
    auto& p = c.problem;
    if (given("--source")) p.source = prcd::parse_source(source);
    if (given("--kind")) p.kind = prcd::parse_problem_kind(kind);
    if (given("--pattern")) p.pattern = prcd::parse_pattern(pattern);
    if (given("--matrix")) {
      p.matrix_path = matrix;
      if (!given("--source")) p.source = prcd::ProblemSource::LoadMatrix;
    }
    if (given("--rhs")) p.rhs_path = rhs;
    if (given("--sigma-file")) p.sigma_path = sigma_file;
    if (given("--center-file")) p.center_path = center_file;
    if (given("--rows")) p.m = m;
    if (given("--cols")) p.n = n;
    if (given("--samples")) p.samples = samples;
    if (given("--sparsity")) p.sparsity = sparsity;
    if (given("--group-size")) p.group_size = group_size;
    if (given("--lambda")) p.lambda = lambda;
    if (given("--box")) p.box = prcd::Box{box[0], box[1]};
    if (given("--block-size")) p.block_size = block_size;
    if (given("--noise")) p.noise = noise;
    if (given("--sigma-range")) {
      p.sigma_min = sigma_range[0];
      p.sigma_max = sigma_range[1];
    }
    if (given("--problem-seed")) p.seed = problem_seed;
    auto has = [&](const char* name) { return app->get_option_no_throw(name) != nullptr && given(name); };
    if (has("--modes")) {
      c.modes.clear();
      for (const auto& s : modes) c.modes.push_back(prcd::parse_mode(s));
    }
    if (has("--taus")) c.taus = taus;
    if (has("--seeds")) c.seeds = seeds;
    if (has("--scheme")) c.scheme = prcd::parse_scheme(scheme);
    if (has("--gap-tol")) c.gap_tolerance = gap_tol;
    if (has("--max-iters")) c.max_iters = max_iters;
    if (has("--log-stride")) c.log_stride = log_stride;
    if (has("--ref-tol")) c.reference_tolerance = ref_tol;
    if (has("--ref-max-iters")) c.reference_max_iters = ref_max_iters;
    if (has("--out")) c.output_dir = out;
    if (has("--no-timing") && no_timing) c.timing = false;
    if (has("--workers")) c.workers = workers;
    return c;
  }
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_generate(const CommonFlags& f, const std::string& prefix) {
  auto config = f.resolve();
  if (config.problem.source == prcd::ProblemSource::LoadMatrix) {
    throw prcd::InputError("generate needs a generate-* source");
  }
  config.validate();
  const auto data = prcd::make_problem_data(config.problem);
  const auto problem = prcd::build_problem(data);
  json doc;
  doc["problem"] = prcd::save_problem(data, prefix);
  std::ofstream out(prefix + ".json");
  if (!out) throw prcd::InputError("cannot write '" + prefix + ".json'");
  out << doc.dump(2) << '\n';
  print_json({{"config", prefix + ".json"},
              {"kind", prcd::to_string(data.kind)},
              {"rows", data.matrix.rows},
              {"cols", data.matrix.cols},
              {"nnz", data.matrix.entries.size()},
              {"num_blocks", problem.num_blocks()},
              {"num_components", problem.num_components()},
              {"omega", problem.omega()},
              {"omega_bar", problem.omega_bar()}});
  return 0;
}

struct SolveFlags {
  std::string mode = "prcd", stop = "gap", trace;
  std::size_t tau = 1;
  std::uint64_t seed = 1;
  double tol = -1.0;
};

int cmd_solve(const CommonFlags& f, const SolveFlags& s) {
  auto config = f.resolve();
  config.validate();
  const auto data = prcd::make_problem_data(config.problem);
  const auto problem = prcd::build_problem(data);
  prcd::SolverConfig sc;
  sc.mode = prcd::parse_mode(s.mode);
  sc.sampler = prcd::SamplerConfig{config.scheme, s.tau, s.seed};
  sc.max_iters = config.max_iters;
  sc.workers = prcd::workers_from_env(config.workers);
  sc.log_stride = config.log_stride > 0 ? config.log_stride : std::max<std::size_t>(1, problem.num_blocks() / s.tau);
  std::optional<prcd::Reference> ref;
  const std::vector<double> x0(problem.dimension(), 0.0);
  if (s.stop == "gap") {
    ref = prcd::compute_reference(problem, config.reference_tolerance, config.reference_max_iters);
    const double gap0 = prcd::make_state(problem, x0).objective - ref->f_star;
    sc.stop = prcd::StopRule::Gap;
    sc.f_star = ref->f_star;
    sc.tolerance = s.tol >= 0.0 ? s.tol : config.gap_tolerance * std::max(0.0, gap0);
  } else if (s.stop == "mapping") {
    sc.stop = prcd::StopRule::MappingNorm;
    sc.tolerance = s.tol >= 0.0 ? s.tol : 1e-8;
  } else if (s.stop == "iters") {
    sc.stop = prcd::StopRule::IterationCap;
  } else {
    throw prcd::InputError("unknown stop rule '" + s.stop + "' (expected gap, mapping or iters)");
  }
  const auto r = prcd::run(problem, sc, x0);
  if (!s.trace.empty()) {
    std::ofstream out(s.trace);
    if (!out) throw prcd::InputError("cannot write '" + s.trace + "'");
    out << "k,tau_k_over_n,objective,mapping_norm,elapsed\n";
    for (const auto& rec : r.trace) {
      out << rec.iteration << ','
          << prcd::detail::format_double(static_cast<double>(rec.coordinate_updates) / problem.num_blocks()) << ','
          << prcd::detail::format_double(rec.objective) << ',' << prcd::detail::format_double(rec.mapping_norm)
          << ',' << prcd::detail::format_double(config.timing ? rec.elapsed_seconds : 0.0) << '\n';
    }
  }
  json j{{"status", prcd::to_string(r.status)},
         {"mode", prcd::to_string(sc.mode)},
         {"tau", sc.mode == prcd::SolverMode::FullProxGrad ? problem.num_blocks() : s.tau},
         {"iterations", r.state.iteration},
         {"tau_k_over_n", static_cast<double>(r.state.coordinate_updates) / problem.num_blocks()},
         {"objective", r.state.objective},
         {"mapping_norm", prcd::mapping_norm(problem, r.state)},
         {"omega", problem.omega()},
         {"omega_bar", problem.omega_bar()}};
  if (ref) j["f_star"] = ref->f_star;
  print_json(j);
  return 0;
}

int cmd_compare(const CommonFlags& f) {
  const auto config = f.resolve();
  const auto ex = prcd::run_experiment(config);
  prcd::write_summary_csv(std::cout, ex);
  std::size_t failed = 0, capped = 0;
  for (const auto& c : ex.cells) {
    if (!c.error.empty()) {
      ++failed;
      std::cerr << "cell " << prcd::to_string(c.mode) << " tau=" << c.tau << " seed=" << c.seed
                << " failed: " << c.error << '\n';
    } else if (c.status != prcd::RunStatus::Converged) {
      ++capped;
    }
  }
  if (capped > 0) std::cerr << capped << " cell(s) stopped at the iteration cap\n";
  if (!ex.reference.converged) std::cerr << "warning: reference solve stopped at its iteration cap\n";
  std::cerr << "wrote " << config.output_dir << "/summary.csv\n";
  return failed > 0 ? 1 : 0;
}

struct BoundFlags {
  std::size_t num_blocks = 0, tau = 1;
  double radius = 0, gap0 = 0, sigma_w = 0, kappa1 = 0, kappa2 = 0, eps = 0, rho = 0;
  std::vector<double> ks;
};

int cmd_bounds(CLI::App* app, const BoundFlags& f) {
  prcd::RateBundle b;
  b.num_blocks = f.num_blocks;
  b.tau = f.tau;
  b.radius = f.radius;
  b.gap0 = f.gap0;
  if (app->count("--sigma-w")) b.sigma_w = f.sigma_w;
  b.kappa1 = f.kappa1;
  b.kappa2 = f.kappa2;
  b.validate();
  const bool confidence = app->count("--eps") > 0 && app->count("--rho") > 0;
  json j{{"N", b.num_blocks}, {"tau", b.tau}, {"radius", b.radius}, {"gap0", b.gap0}};
  json curve = json::array();
  for (double k : f.ks) curve.push_back({{"k", k}, {"sublinear_bound", prcd::sublinear_bound(b, k)}});
  j["sublinear"] = curve;
  if (confidence) j["sublinear_confidence_iters"] = prcd::sublinear_confidence_iters(b, f.eps, f.rho);
  if (b.sigma_w) {
    const double q = prcd::strongly_convex_factor(b);
    j["strongly_convex_factor"] = q;
    json sc = json::array();
    for (double k : f.ks) sc.push_back({{"k", k}, {"bound", std::pow(q, k) * b.gap0}});
    j["strongly_convex"] = sc;
  }
  if (app->count("--kappa1") || app->count("--kappa2")) {
    const auto r = prcd::gebp_linear_rate(b);
    j["gebp"] = {{"c_kappa", r.c_kappa}, {"c1", r.c1}, {"c2", r.c2}, {"c3", r.c3}, {"theta", r.theta}};
    if (confidence) j["gebp_confidence_iters"] = prcd::gebp_confidence_iters(b, f.eps, f.rho);
  }
  print_json(j);
  return 0;
}

struct GebpFlags {
  bool example = false;
  std::string samples_path;
  std::size_t points = 0;
  double radius = 1.0;
  std::uint64_t seed = 1;
};

json fit_json(const prcd::GebpFit& fit, std::size_t samples) {
  return {{"samples", samples},
          {"kappa1", fit.kappa1},
          {"kappa2", fit.kappa2},
          {"max_violation", nullable(fit.max_violation)},
          {"max_classical_ratio", fit.max_classical_ratio},
          {"counter_witnesses", fit.counter_witnesses.size()}};
}

int cmd_gebp(const CommonFlags& f, const GebpFlags& g) {
  if (g.example) {
    const auto problem = prcd::make_error_bound_counterexample();
    std::vector<std::vector<double>> points;
    for (int t = 1; t <= 100; ++t) points.push_back({double(t), double(t)});
    auto project = [](std::span<const double> x) { return std::vector<double>(x.size(), 0.0); };
    const auto fit = prcd::estimate_gebp_constants(problem, project, points);
    std::vector<prcd::GebpSample> unit;
    bool unit_feasible = true;
    for (const auto& x : points) {
      prcd::GebpSample s{prcd::w_distance(problem, x, project(x)), prcd::prox_grad_mapping(problem, x).w_norm};
      unit_feasible = unit_feasible && prcd::gebp_violation(s, 1.0, 1.0) <= 0.0;
    }
    auto j = fit_json(fit, points.size());
    j["unit_constants_feasible"] = unit_feasible;
    print_json(j);
    return 0;
  }
  if (!g.samples_path.empty()) {
    std::ifstream in(g.samples_path);
    if (!in) throw prcd::InputError("cannot open samples file '" + g.samples_path + "'");
    std::vector<prcd::GebpSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#' || line.rfind("distance", 0) == 0) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream fields(line);
      prcd::GebpSample s;
      if (!(fields >> s.distance >> s.mapping_norm)) {
        throw prcd::InputError(g.samples_path + ":" + std::to_string(line_no) + ": expected 'distance,mapping_norm'");
      }
      samples.push_back(s);
    }
    print_json(fit_json(prcd::fit_gebp_constants(samples), samples.size()));
    return 0;
  }
  // Sample points around the reference solution; its projection is only exact
  // when the minimizer is unique.
  auto config = f.resolve();
  config.validate();
  const auto problem = prcd::build_problem(prcd::make_problem_data(config.problem));
  const auto ref = prcd::compute_reference(problem, config.reference_tolerance, config.reference_max_iters);
  if (g.points == 0) throw prcd::InputError("gebp-fit needs --example, --sample-file or --points > 0");
  prcd::Xoshiro256 rng(g.seed);
  std::vector<std::vector<double>> points;
  for (std::size_t p = 0; p < g.points; ++p) {
    std::vector<double> x = ref.x;
    for (auto& v : x) v += g.radius * rng.normal();
    points.push_back(prcd::make_state(problem, x).x);
  }
  const std::vector<double> xstar = ref.x;
  auto project = [&](std::span<const double>) { return xstar; };
  auto j = fit_json(prcd::estimate_gebp_constants(problem, project, points), points.size());
  j["reference_mapping_norm"] = ref.mapping_norm;
  print_json(j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel randomized block-coordinate descent for composite convex problems"};
  app.require_subcommand(1);

  CommonFlags gen_flags, solve_flags, compare_flags, gebp_flags;
  std::string prefix;
  auto* gen = app.add_subcommand("generate", "generate a problem instance and write its files");
  gen_flags.add_problem(gen);
  gen->add_option("-o,--out", prefix, "output prefix (writes .mtx, .rhs, .json)")->required();

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "run one solver configuration");
  solve_flags.add_problem(solve);
  solve_flags.add_experiment(solve);
  solve->add_option("--mode", sf.mode, "prcd | pcdm1 | full");
  solve->add_option("--tau", sf.tau, "blocks per iteration");
  solve->add_option("--seed", sf.seed, "sampling seed");
  solve->add_option("--stop", sf.stop, "gap | mapping | iters");
  solve->add_option("--tol", sf.tol, "absolute stopping tolerance (gap default: gap_tol * initial gap)");
  solve->add_option("--trace", sf.trace, "write the iteration trace CSV here");

  auto* compare = app.add_subcommand("compare", "run the (mode x tau x seed) experiment grid");
  compare_flags.add_problem(compare);
  compare_flags.add_experiment(compare);

  BoundFlags bf;
  auto* bounds = app.add_subcommand("bounds", "evaluate the convergence bounds");
  bounds->add_option("-N,--num-blocks", bf.num_blocks, "number of blocks")->required();
  bounds->add_option("--tau", bf.tau, "blocks per iteration");
  bounds->add_option("--radius", bf.radius, "R_W(x0)");
  bounds->add_option("--gap0", bf.gap0, "F(x0) - F*");
  bounds->add_option("--sigma-w", bf.sigma_w, "strong convexity constant in the W-norm");
  bounds->add_option("--kappa1", bf.kappa1, "error bound constant kappa1");
  bounds->add_option("--kappa2", bf.kappa2, "error bound constant kappa2");
  bounds->add_option("--eps", bf.eps, "target accuracy");
  bounds->add_option("--rho", bf.rho, "failure probability");
  bounds->add_option("--k", bf.ks, "iterations at which to evaluate the envelopes");

  GebpFlags gf;
  auto* gebp = app.add_subcommand("gebp-fit", "fit the generalized error bound constants");
  gebp_flags.add_problem(gebp);
  gebp->add_flag("--example", gf.example, "use the built-in two-variable counterexample");
  gebp->add_option("--sample-file", gf.samples_path, "CSV of distance,mapping_norm pairs");
  gebp->add_option("--points", gf.points, "random points around the reference solution");
  gebp->add_option("--radius", gf.radius, "standard deviation of the random points");
  gebp->add_option("--seed", gf.seed, "point sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(prcd::ErrorCategory::Input);
  }

  try {
    if (*gen) return cmd_generate(gen_flags, prefix);
    if (*solve) return cmd_solve(solve_flags, sf);
    if (*compare) return cmd_compare(compare_flags);
    if (*bounds) return cmd_bounds(bounds, bf);
    if (*gebp) return cmd_gebp(gebp_flags, gf);
  } catch (const prcd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
