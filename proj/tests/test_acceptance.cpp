// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero if any fails. Every tolerance is a named constant below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "prcd/harness/experiment.hpp"
#include "support.hpp"

using namespace prcd;

namespace {

constexpr double kDescentSlack = 1e-10;         // criterion 1, relative to 1 + |F|
constexpr double kMonotoneMaxSeconds = 60.0;    // criterion 1
constexpr double kEquivalenceTol = 1e-12;       // criterion 2
constexpr double kLemmaSlack = -1e-9;           // criterion 3
constexpr double kGradientRelTol = 1e-5;        // criterion 4
constexpr double kGradientFloor = 1e-6;         // criterion 4, denominator floor for vanishing gradients
constexpr double kProxTol = 1e-8;               // criterion 5
constexpr double kEnvelopeSlack = 1.05;         // criteria 6 and 7
constexpr double kSublinearMaxSeconds = 120.0;  // criterion 6
constexpr double kRatioTol = 1e-9;              // criterion 8
constexpr double kKappa1RelTol = 1e-6;          // criterion 9
constexpr double kKappa2Max = 1e-8;             // criterion 9
constexpr double kTrendGapFraction = 1e-4;      // criterion 10
constexpr double kSamplerSds = 3.0;             // criterion 11
constexpr double kBoundRelTol = 1e-12;          // criterion 12

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Reference tight_reference(const CompositeProblem& p, double tol = 1e-12) {
  return compute_reference(p, tol, 5000000);
}

// 1. F(x^{k+1}) <= F(x^k) + slack (1 + |F(x^k)|) along every run.
Outcome monotone_descent() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
  for (const auto& d : fixtures::mixed_instances(20, 77)) {
    const auto problem = build_problem(d);
    const std::size_t N = problem.num_blocks();
    if (problem.dimension() > 500) return {false, "instance larger than n = 500"};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (std::size_t tau : {std::size_t{1}, (N + 3) / 4, N}) {
        auto state = make_state(problem, std::vector<double>(problem.dimension(), 0.0));
        Sampler sampler({SamplingScheme::TauNiceUniform, tau, seed}, N);
        const std::size_t iters = std::min<std::size_t>(400, std::max<std::size_t>(100, 3 * N / tau));
        double prev = eval_objective(problem, state.x);
        for (std::size_t k = 0; k < iters; ++k) {
          step(problem, state, sampler.draw());
          const double now = eval_objective(problem, state.x);
          worst = std::max(worst, (now - prev) / (1.0 + std::abs(prev)));
          prev = now;
          ++steps;
        }
      }
    }
  }
  const double secs = seconds_since(start);
  o.pass = worst <= kDescentSlack && secs < kMonotoneMaxSeconds;
  o.detail = std::to_string(steps) + " steps, max relative increase " + fmt(worst) + ", " + fmt(secs) + " s";
  return o;
}

// 2. tau = N sampling reproduces the deterministic full method for 200 iterations.
Outcome reduction_equivalence() {
  double worst = 0.0;
  for (const auto& d : fixtures::mixed_instances(5, 13)) {
    const auto problem = build_problem(d);
    const std::size_t N = problem.num_blocks();
    const std::vector<double> x0(problem.dimension(), 0.0);
    auto a = make_state(problem, x0), b = make_state(problem, x0);
    Sampler sampler({SamplingScheme::TauNiceUniform, N, 7}, N);
    std::vector<std::size_t> all(N);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (int k = 0; k < 200; ++k) {
      step(problem, a, sampler.draw());
      step(problem, b, all);
      for (std::size_t r = 0; r < a.x.size(); ++r) worst = std::max(worst, std::abs(a.x[r] - b.x[r]));
    }
  }
  return {worst <= kEquivalenceTol, "5 instances x 200 iterations, max deviation " + fmt(worst)};
}

std::vector<ProblemData> family(ProblemKind kind, std::size_t count) {
  std::vector<ProblemData> out;
  for (std::size_t t = 0; t < count; ++t) {
    if (kind == ProblemKind::Lasso) {
      LassoOptions o;
      o.m = 50;
      o.n = 40;
      o.sparsity = 0.1;
      o.box = t % 2 ? std::optional<Box>(Box{-1.0, 1.0}) : std::nullopt;
      o.block_size = 1 + t % 3;
      o.seed = 100 + t;
      out.push_back(generate_lasso(o));
    } else if (kind == ProblemKind::Logistic) {
      LogisticOptions o;
      o.samples = 60;
      o.n = 30;
      o.sparsity = 0.15;
      o.block_size = 1 + t % 3;
      o.seed = 200 + t;
      out.push_back(generate_logistic(o));
    } else {
      DualOptions o;
      o.n = 30;
      o.m = 30;
      o.pattern = t % 2 ? SparsityPattern::Uniform : SparsityPattern::BlockAngular;
      o.sparsity = 0.15;
      o.block_size = 1 + t % 3;
      o.seed = 300 + t;
      out.push_back(generate_dual(o));
    }
  }
  return out;
}

// 3. Descent lemma f(y) <= f(x) + <grad f(x), y - x> + |y - x|_W^2 / 2 and
//    |grad f(x) - grad f(y)|_{W^-1} <= |x - y|_W on 10^4 pairs per family.
Outcome descent_lemma_suite() {
  Outcome o;
  std::ostringstream detail;
  Xoshiro256 rng(31);
  for (auto kind : {ProblemKind::Lasso, ProblemKind::Logistic, ProblemKind::Dual}) {
    double worst_lemma = std::numeric_limits<double>::infinity(), worst_lip = worst_lemma;
    for (const auto& d : family(kind, 10)) {
      const auto problem = build_problem(d);
      for (int p = 0; p < 1000; ++p) {
        std::vector<double> x(problem.dimension()), y(problem.dimension());
        const double scale = std::exp(2.0 * rng.normal() - 1.0);
        for (auto& v : x) v = rng.normal();
        for (std::size_t r = 0; r < y.size(); ++r) y[r] = x[r] + scale * rng.normal();
        const auto gx = full_gradient(problem, x), gy = full_gradient(problem, y);
        std::vector<double> dxy(x.size()), dg(x.size());
        double lin = 0.0;
        for (std::size_t r = 0; r < x.size(); ++r) {
          dxy[r] = y[r] - x[r];
          dg[r] = gx[r] - gy[r];
          lin += gx[r] * dxy[r];
        }
        const double rhs = problem.smooth_value(x) + lin + 0.5 * problem.w_norm_squared(dxy);
        worst_lemma = std::min(worst_lemma, rhs - problem.smooth_value(y));
        worst_lip = std::min(worst_lip, problem.w_norm(dxy) - problem.w_inv_norm(dg));
      }
    }
    o.pass = o.pass && worst_lemma >= kLemmaSlack && worst_lip >= kLemmaSlack;
    detail << to_string(kind) << " min slack " << fmt(worst_lemma) << "/" << fmt(worst_lip) << "; ";
  }
  o.detail = detail.str() + "10^4 pairs per family";
  return o;
}

// 4. Central differences against partial_gradient on 10^3 (instance, block, point) triples.
Outcome gradient_correctness() {
  Xoshiro256 rng(41);
  const auto pool = fixtures::mixed_instances(20, 41);
  std::vector<CompositeProblem> problems;
  for (const auto& d : pool) problems.push_back(build_problem(d));
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto& problem = problems[rng.bounded(problems.size())];
    auto x = fixtures::random_point(problem, rng);
    const std::size_t block = rng.bounded(problem.num_blocks());
    const auto g = partial_gradient(problem, x, block);
    const std::size_t off = problem.partition().offset(block);
    double err = 0.0, norm = 0.0;
    for (std::size_t r = 0; r < g.size(); ++r) {
      const double keep = x[off + r];
      const double h = 1e-6 * (1.0 + std::abs(keep));
      x[off + r] = keep + h;
      const double fp = problem.smooth_value(x);
      x[off + r] = keep - h;
      const double fm = problem.smooth_value(x);
      x[off + r] = keep;
      const double fd = (fp - fm) / (2.0 * h);
      err += (fd - g[r]) * (fd - g[r]);
      norm += g[r] * g[r];
    }
    worst = std::max(worst, std::sqrt(err) / std::max(std::sqrt(norm), kGradientFloor));
  }
  return {worst <= kGradientRelTol, "1000 triples, max relative error " + fmt(worst)};
}

// 5. prox_block against golden-section minimization, 10^3 scalar cases per kind.
Outcome prox_oracle() {
  Xoshiro256 rng(51);
  double worst = 0.0;
  const RegularizerKind kinds[] = {RegularizerKind::Zero, RegularizerKind::L1, RegularizerKind::Box,
                                   RegularizerKind::NonnegOrthant, RegularizerKind::L1Box};
  for (auto kind : kinds) {
    for (int t = 0; t < 1000; ++t) {
      const double v = 5.0 * rng.normal(), w = std::exp(1.5 * rng.normal()), lambda = std::exp(rng.normal());
      const double lo0 = 2.0 * rng.normal(), hi0 = lo0 + 3.0 * rng.uniform();
      RegularizerSpec spec;
      switch (kind) {
        case RegularizerKind::Zero: spec = RegularizerSpec::zero(); break;
        case RegularizerKind::L1: spec = RegularizerSpec::l1(lambda); break;
        case RegularizerKind::Box: spec = RegularizerSpec::box(1, lo0, hi0); break;
        case RegularizerKind::NonnegOrthant: spec = RegularizerSpec::nonneg(); break;
        case RegularizerKind::L1Box: spec = RegularizerSpec::l1_box(1, lambda, lo0, hi0); break;
      }
      const double l = spec.has_l1() ? spec.lambda : 0.0;
      double lo = v - l / w - 1.0, hi = v + l / w + 1.0;
      if (spec.has_box()) lo = lo0, hi = hi0;
      if (kind == RegularizerKind::NonnegOrthant) lo = 0.0, hi = std::max(hi, 1.0);
      auto diff = [&](double a, double b) {
        return l * (std::abs(a) - std::abs(b)) + 0.5 * w * (a - b) * (a + b - 2.0 * v);
      };
      worst = std::max(worst, std::abs(prox_scalar(spec, v, w) - fixtures::golden_section(diff, lo, hi)));
    }
  }
  return {worst <= kProxTol, "5 kinds x 1000 cases, max deviation " + fmt(worst)};
}

// Ensemble mean of F(x^k) - F* over seeds at the logged iterations.
std::vector<std::pair<std::size_t, double>> ensemble_gap(const CompositeProblem& problem, std::size_t tau,
                                                         std::size_t iters, std::size_t log_stride,
                                                         std::size_t seeds, double f_star, bool exact) {
  std::vector<std::pair<std::size_t, double>> mean;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    auto state = make_state(problem, std::vector<double>(problem.dimension(), 0.0));
    Sampler sampler({SamplingScheme::TauNiceUniform, tau, seed}, problem.num_blocks());
    std::size_t slot = 0;
    for (std::size_t k = 0; k <= iters; ++k) {
      if (k > 0) step(problem, state, sampler.draw());
      if (k % log_stride != 0) continue;
      const double f = exact ? eval_objective(problem, state.x) : state.objective;
      if (seed == 1) mean.emplace_back(k, 0.0);
      mean[slot++].second += (f - f_star) / static_cast<double>(seeds);
    }
  }
  return mean;
}

// 6. Sublinear envelope on a fixed lasso instance.
Outcome sublinear_envelope() {
  const auto start = std::chrono::steady_clock::now();
  LassoOptions opt;
  opt.m = 180;
  opt.n = 200;
  opt.sparsity = 0.02;
  opt.lambda = 0.5;
  opt.seed = 2024;
  const auto problem = build_problem(generate_lasso(opt));
  const auto ref = tight_reference(problem);
  const std::vector<double> x0(200, 0.0);
  RateBundle b;
  b.num_blocks = problem.num_blocks();
  b.radius = w_distance(problem, x0, ref.x);
  b.gap0 = eval_objective(problem, x0) - ref.f_star;
  Outcome o;
  std::ostringstream detail;
  detail << "R_W " << fmt(b.radius) << ", gap0 " << fmt(b.gap0);
  for (std::size_t tau : {1u, 10u, 50u}) {
    b.tau = tau;
    const std::size_t epochs = 40, iters = epochs * b.num_blocks / tau;
    const auto mean = ensemble_gap(problem, tau, iters, std::max<std::size_t>(1, b.num_blocks / (4 * tau)), 50,
                                   ref.f_star, false);
    double worst = 0.0;
    for (const auto& [k, gap] : mean) worst = std::max(worst, gap / sublinear_bound(b, static_cast<double>(k)));
    o.pass = o.pass && worst <= kEnvelopeSlack;
    detail << "; tau " << tau << ": max mean/bound " << fmt(worst) << " over " << mean.size() << " logged k";
  }
  const double secs = seconds_since(start);
  o.pass = o.pass && secs < kSublinearMaxSeconds;
  detail << "; " << fmt(secs) << " s";
  o.detail = detail.str();
  return o;
}

// 7. Linear envelope (1 - tau sigma_W / N)^k gap0 on a strongly convex instance.
Outcome strongly_convex_envelope() {
  const double mu = 4.0;
  const auto problem = build_problem(fixtures::cycle_instance(50, mu, 0.1, 7));
  const auto ref = tight_reference(problem, 1e-14);
  const std::vector<double> x0(50, 0.0);
  RateBundle b;
  b.num_blocks = 50;
  b.sigma_w = fixtures::cycle_sigma_w(mu);
  b.gap0 = eval_objective(problem, x0) - ref.f_star;
  Outcome o;
  std::ostringstream detail;
  detail << "sigma_W " << fmt(*b.sigma_w);
  for (std::size_t tau : {1u, 5u}) {
    b.tau = tau;
    const double q = strongly_convex_factor(b);
    const auto mean = ensemble_gap(problem, tau, 500, 1, 50, ref.f_star, true);
    double worst = 0.0;
    for (const auto& [k, gap] : mean) {
      const double bound = std::pow(q, static_cast<double>(k)) * b.gap0;
      worst = std::max(worst, gap / bound);
    }
    o.pass = o.pass && worst <= kEnvelopeSlack;
    detail << "; tau " << tau << ": max mean/bound " << fmt(worst) << " for k <= 500";
  }
  o.detail = detail.str();
  return o;
}

// 8. Error bound counterexample along x = (t, t).
Outcome gebp_counterexample() {
  const auto problem = make_error_bound_counterexample();
  auto project = [](std::span<const double> x) { return std::vector<double>(x.size(), 0.0); };
  std::vector<std::vector<double>> points;
  double worst_ratio = 0.0;
  bool unit_ok = true;
  for (int t = 1; t <= 100; ++t) {
    const std::vector<double> x{double(t), double(t)};
    const GebpSample s{w_distance(problem, x, project(x)), prox_grad_mapping(problem, x).w_norm};
    worst_ratio = std::max(worst_ratio, std::abs(s.distance / s.mapping_norm - t));
    unit_ok = unit_ok && gebp_violation(s, 1.0, 1.0) <= 0.0;
    points.push_back(x);
  }
  const auto fit = estimate_gebp_constants(problem, project, points);
  const bool pass = worst_ratio <= kRatioTol && unit_ok && fit.max_violation <= 0.0 && fit.counter_witnesses.empty();
  return {pass, "max |ratio - t| " + fmt(worst_ratio) + ", fit (" + fmt(fit.kappa1) + ", " + fmt(fit.kappa2) +
                    ") max violation " + fmt(fit.max_violation) + ", (1,1) feasible " + (unit_ok ? "yes" : "no")};
}

// 9. Fitted constants on strongly convex instances: kappa1 <= 2 / sigma_W, kappa2 ~ 0.
Outcome case1_constants() {
  Outcome o;
  double worst_k1 = 0.0, worst_k2 = 0.0;
  Xoshiro256 rng(91);
  for (int inst = 0; inst < 10; ++inst) {
    ProblemData d;
    if (inst < 5) {
      d = fixtures::cycle_instance(20 + 5 * inst, 0.5 + inst, 0.2, 90 + inst);
    } else {
      LassoOptions opt;
      opt.m = 60;
      opt.n = 20;
      opt.sparsity = 0.3;
      opt.lambda = 0.2;
      opt.seed = 90 + inst;
      d = generate_lasso(opt);
    }
    const auto problem = build_problem(d);
    const double sigma = estimate_sigma_w(problem);
    if (!(sigma > 0.0)) return {false, "instance " + std::to_string(inst) + " is not strongly convex"};
    const auto xstar = tight_reference(problem, 1e-14).x;
    std::vector<std::vector<double>> points;
    for (int p = 0; p < 200; ++p) {
      std::vector<double> u(xstar.size());
      for (auto& v : u) v = rng.normal();
      const double r = 0.01 + 0.99 * rng.uniform();
      const double scale = r / problem.w_norm(u);
      for (std::size_t c = 0; c < u.size(); ++c) u[c] = xstar[c] + scale * u[c];
      points.push_back(u);
    }
    auto project = [&](std::span<const double>) { return xstar; };
    const auto fit = estimate_gebp_constants(problem, project, points);
    worst_k1 = std::max(worst_k1, fit.kappa1 * sigma / 2.0);
    worst_k2 = std::max(worst_k2, fit.kappa2);
  }
  o.pass = worst_k1 <= 1.0 + kKappa1RelTol && worst_k2 <= kKappa2Max;
  o.detail = "10 instances, max kappa1 sigma_W / 2 = " + fmt(worst_k1) + ", max kappa2 " + fmt(worst_k2);
  return o;
}

// 10. Normalized coordinate updates to reach the gap target, P-RCD vs PCDM1.
Outcome stepsize_trend() {
  int wins = 0;
  std::size_t omega_bar = 0, omega = 0;
  std::ostringstream detail;
  for (int inst = 0; inst < 5; ++inst) {
    ExperimentConfig c;
    c.problem.source = ProblemSource::GenerateLasso;
    c.problem.pattern = SparsityPattern::BlockAngular;
    c.problem.n = 200;
    c.problem.group_size = 25;
    c.problem.lambda = 0.5;
    c.problem.seed = 1000 + static_cast<std::uint64_t>(inst);
    c.taus = {50};
    c.seeds = {1, 2, 3};
    c.gap_tolerance = kTrendGapFraction;
    c.timing = false;
    const auto ex = run_experiment_in_memory(c);
    const auto& row = ex.summary.at(0);
    if (row.omega_bar > 5 || row.omega > row.tau) return {false, "instance does not satisfy omega_bar <= 5, omega <= tau"};
    const bool win = row.prcd_converged == 3 && row.pcdm1_converged == 3 && row.tauk_prcd <= row.tauk_pcdm1;
    wins += win ? 1 : 0;
    omega_bar = std::max(omega_bar, row.omega_bar);
    omega = std::max(omega, row.omega);
    detail << (inst ? "; " : "") << fmt(row.tauk_prcd) << " vs " << fmt(row.tauk_pcdm1);
  }
  return {wins >= 4, std::to_string(wins) + "/5 instances favor P-RCD (tau k / n: " + detail.str() +
                         "), max omega_bar " + std::to_string(omega_bar) +
                         ", max omega " + std::to_string(omega) + ", tau 50"};
}

// 11. Empirical inclusion frequencies and seed determinism.
Outcome sampler_statistics() {
  const std::size_t N = 20, tau = 5, draws = 100000;
  double worst = 0.0;
  bool deterministic = true;
  for (auto scheme : {SamplingScheme::TauNiceUniform, SamplingScheme::PartitionShuffle}) {
    Sampler s({scheme, tau, 2718}, N), twin({scheme, tau, 2718}, N);
    std::vector<double> hits(N, 0.0);
    for (std::size_t k = 0; k < draws; ++k) {
      const auto S = s.draw();
      deterministic = deterministic && S == twin.draw();
      for (auto i : S) hits[i] += 1.0;
    }
    const double p = double(tau) / N, sd = std::sqrt(draws * p * (1.0 - p));
    for (double h : hits) worst = std::max(worst, std::abs(h - draws * p) / sd);
  }
  return {worst <= kSamplerSds && deterministic,
          "max deviation " + fmt(worst) + " binomial sd, identical seeds identical: " + (deterministic ? "yes" : "no")};
}

// 12. Bound evaluators against frozen values from an independent 50-digit evaluation.
Outcome bound_evaluators() {
  struct Case {
    std::size_t N, tau;
    double radius, gap0, sigma, kappa1, kappa2, eps, rho, k;
    double sub, factor, theta, k_sub_rhs;
    std::size_t k_sub, k_gebp;
  };
  const Case cases[] = {
      {100, 10, 2, 5, 0.3, 1, 0.5, 1e-3, 0.05, 50, 1.1666666666666666667, 0.97, 0.99908234710543940925,
       294493.01490553133051, 294494, 12547},
      {1000, 1, 0.5, 10, 0.01, 4, 0, 1e-2, 0.1, 1000, 5.0625, 0.99999, 0.99999993845389618833, 3856428.503745424437,
       3856429, 149649447},
      {64, 64, 3, 1, 1, 0, 2, 0.5, 0.01, 3, 1.375, 0.0, 0.98666666666666666667, 72.150376231734637638, 73, 398},
      {50, 7, 1.5, 20, 0.5, 2.5, 0.1, 1e-4, 0.2, 123, 1.1594401756311745335, 0.93, 0.99796008442571686087,
       3651004.7171527323034, 3651005, 6773},
      {10000, 250, 10, 0.7, 0.05, 10, 0.01, 1e-6, 0.5, 7, 43.148936170212765957, 0.99875, 0.99999488034361316861,
       -2979141645.6071935838, 0, 2764245},
  };
  double worst = 0.0;
  bool counts = true;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  for (const auto& c : cases) {
    RateBundle b;
    b.num_blocks = c.N;
    b.tau = c.tau;
    b.radius = c.radius;
    b.gap0 = c.gap0;
    b.sigma_w = c.sigma;
    b.kappa1 = c.kappa1;
    b.kappa2 = c.kappa2;
    worst = std::max(worst, rel(sublinear_bound(b, c.k), c.sub));
    worst = std::max(worst, rel(strongly_convex_factor(b), c.factor));
    worst = std::max(worst, rel(gebp_linear_theta(b), c.theta));
    worst = std::max(worst, rel(detail::sublinear_confidence_rhs(b, c.eps, c.rho), c.k_sub_rhs));
    counts = counts && sublinear_confidence_iters(b, c.eps, c.rho) == c.k_sub;
    counts = counts && gebp_confidence_iters(b, c.eps, c.rho) == c.k_gebp;
  }
  return {worst <= kBoundRelTol && counts,
          "5 parameter sets, max relative deviation " + fmt(worst) + ", iteration counts " +
              (counts ? "exact" : "MISMATCH")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"monotone descent", monotone_descent},
      {"reduction equivalence tau = N", reduction_equivalence},
      {"descent lemma and W-Lipschitz gradient", descent_lemma_suite},
      {"gradient finite differences", gradient_correctness},
      {"prox golden-section oracle", prox_oracle},
      {"sublinear envelope", sublinear_envelope},
      {"strongly convex linear envelope", strongly_convex_envelope},
      {"error bound counterexample", gebp_counterexample},
      {"strongly convex error bound constants", case1_constants},
      {"P-RCD vs PCDM1 stepsize trend", stepsize_trend},
      {"sampler statistics", sampler_statistics},
      {"bound evaluators", bound_evaluators},
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    Outcome o;
    try {
      o = criteria[c].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", c + 1, criteria[c].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
