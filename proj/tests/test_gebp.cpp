#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support.hpp"

using namespace prcd;

TEST(GebpFit, SingleSample) {
  // d = 2, g = 1: kappa1 + 4 kappa2 >= 2, cheapest is kappa2 = 1/2.
  const std::vector<GebpSample> s{{2.0, 1.0}};
  const auto fit = fit_gebp_constants(s);
  EXPECT_DOUBLE_EQ(fit.kappa1, 0.0);
  EXPECT_DOUBLE_EQ(fit.kappa2, 0.5);
  EXPECT_DOUBLE_EQ(fit.max_classical_ratio, 2.0);
  EXPECT_LE(fit.max_violation, 1e-15);
}

TEST(GebpFit, InsideUnitBallPrefersKappa1) {
  const std::vector<GebpSample> s{{0.5, 0.25}, {1.0, 0.8}, {0.1, 0.1}};
  const auto fit = fit_gebp_constants(s);
  EXPECT_DOUBLE_EQ(fit.kappa1, 2.0);
  EXPECT_DOUBLE_EQ(fit.kappa2, 0.0);
}

TEST(GebpFit, TwoActiveConstraints) {
  // kappa1 + kappa2/4 >= 1 and kappa1 + 4 kappa2 >= 4: the vertex (0.8, 0.8)
  // is cheaper than either axis point (4, 0) or (0, 4).
  const std::vector<GebpSample> s{{0.5, 0.5}, {2.0, 0.5}};
  const auto fit = fit_gebp_constants(s);
  EXPECT_NEAR(fit.kappa1, 0.8, 1e-15);
  EXPECT_NEAR(fit.kappa2, 0.8, 1e-15);
}

TEST(GebpFit, SampleAtOptimumIsTrivial) {
  const std::vector<GebpSample> s{{0.0, 0.0}, {1.0, 1.0}};
  const auto fit = fit_gebp_constants(s);
  EXPECT_TRUE(fit.counter_witnesses.empty());
  EXPECT_DOUBLE_EQ(fit.kappa1, 1.0);
  EXPECT_LE(gebp_violation(s[0], 0.0, 0.0), 0.0);
}

TEST(GebpFit, CounterWitness) {
  const std::vector<GebpSample> s{{1.0, 0.0}, {1.0, 1.0}};
  const auto fit = fit_gebp_constants(s);
  ASSERT_EQ(fit.counter_witnesses.size(), 1u);
  EXPECT_EQ(fit.counter_witnesses[0], 0u);
  EXPECT_THROW(fit_gebp_constants(std::vector<GebpSample>{{-1.0, 1.0}}), InputError);
}

TEST(Counterexample, RatioGrowsLinearly) {
  const auto problem = make_error_bound_counterexample();
  auto project = [](std::span<const double> x) { return std::vector<double>(x.size(), 0.0); };
  std::vector<std::vector<double>> points;
  for (int t = 1; t <= 100; ++t) {
    const std::vector<double> x{double(t), double(t)};
    const double ratio = w_distance(problem, x, project(x)) / prox_grad_mapping(problem, x).w_norm;
    EXPECT_NEAR(ratio, t, 1e-9);
    points.push_back(x);
  }
  const auto fit = estimate_gebp_constants(problem, project, points);
  EXPECT_NEAR(fit.max_classical_ratio, 100.0, 1e-9);
  EXPECT_LE(fit.max_violation, 1e-12);
  for (const auto& x : points) {
    const GebpSample s{w_distance(problem, x, project(x)), prox_grad_mapping(problem, x).w_norm};
    EXPECT_LE(gebp_violation(s, 1.0, 1.0), 0.0);
  }
}

TEST(Counterexample, MinimizerIsOrigin) {
  const auto problem = make_error_bound_counterexample();
  EXPECT_DOUBLE_EQ(prox_grad_mapping(problem, std::vector<double>{0.0, 0.0}).w_norm, 0.0);
  EXPECT_DOUBLE_EQ(eval_objective(problem, std::vector<double>{0.0, 0.0}), 0.0);
}

TEST(GebpEstimate, StronglyConvexCaseStaysBelowTwoOverSigma) {
  const double mu = 1.0;
  const auto problem = build_problem(fixtures::cycle_instance(10, mu, 0.5, 4));
  SolverConfig c;
  c.mode = SolverMode::FullProxGrad;
  c.stop = StopRule::MappingNorm;
  c.tolerance = 1e-14;
  c.check_stride = 1;
  c.max_iters = 100000;
  const auto xstar = run(problem, c, std::vector<double>(10, 0.0)).state.x;
  Xoshiro256 rng(2);
  std::vector<std::vector<double>> points;
  for (int p = 0; p < 200; ++p) {
    std::vector<double> u(10);
    for (auto& v : u) v = rng.normal();
    const double scale = rng.uniform() / problem.w_norm(u);
    for (std::size_t r = 0; r < 10; ++r) u[r] = xstar[r] + scale * u[r];
    points.push_back(u);
  }
  auto project = [&](std::span<const double>) { return xstar; };
  const auto fit = estimate_gebp_constants(problem, project, points);
  EXPECT_EQ(fit.kappa2, 0.0);
  EXPECT_LE(fit.kappa1, 2.0 / fixtures::cycle_sigma_w(mu));
}
