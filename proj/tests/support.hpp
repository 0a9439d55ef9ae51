#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// evaluate objectives and gradients straight from the raw matrix data with
// dense loops, without going through SmoothComponent or the inner-value cache.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prcd/harness/problems.hpp"
#include "prcd/prcd.hpp"

namespace prcd::fixtures {

inline double oracle_smooth(const ProblemData& d, std::span<const double> x) {
  double f = 0.0;
  switch (d.kind) {
    case ProblemKind::Lasso: {
      std::vector<double> r(d.matrix.rows, 0.0);
      for (const auto& e : d.matrix.entries) r[e.row] += e.value * x[e.col];
      for (std::size_t j = 0; j < r.size(); ++j) f += 0.5 * (r[j] - d.rhs[j]) * (r[j] - d.rhs[j]);
      return f;
    }
    case ProblemKind::Logistic: {
      std::vector<double> r(d.matrix.rows, 0.0);
      for (const auto& e : d.matrix.entries) r[e.row] += e.value * x[e.col];
      for (std::size_t j = 0; j < r.size(); ++j) f += std::log1p(std::exp(-d.rhs[j] * r[j]));
      return f / static_cast<double>(r.size());
    }
    case ProblemKind::Dual: {
      std::vector<double> s(d.matrix.cols, 0.0);  // a_j^T x
      for (const auto& e : d.matrix.entries) s[e.col] += e.value * x[e.row];
      for (std::size_t j = 0; j < s.size(); ++j) f += s[j] * s[j] / (2.0 * d.sigma[j]) - d.center[j] * s[j];
      for (std::size_t i = 0; i < d.rhs.size(); ++i) f += d.rhs[i] * x[i];
      return f;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline std::vector<double> oracle_gradient(const ProblemData& d, std::span<const double> x) {
  std::vector<double> g(x.size(), 0.0);
  switch (d.kind) {
    case ProblemKind::Lasso:
    case ProblemKind::Logistic: {
      std::vector<double> r(d.matrix.rows, 0.0);
      for (const auto& e : d.matrix.entries) r[e.row] += e.value * x[e.col];
      const double m = static_cast<double>(d.matrix.rows);
      for (std::size_t j = 0; j < r.size(); ++j) {
        if (d.kind == ProblemKind::Lasso) {
          r[j] -= d.rhs[j];
        } else {
          const double y = d.rhs[j];
          r[j] = -y / (1.0 + std::exp(y * r[j])) / m;
        }
      }
      for (const auto& e : d.matrix.entries) g[e.col] += e.value * r[e.row];
      return g;
    }
    case ProblemKind::Dual: {
      std::vector<double> s(d.matrix.cols, 0.0);
      for (const auto& e : d.matrix.entries) s[e.col] += e.value * x[e.row];
      for (std::size_t j = 0; j < s.size(); ++j) s[j] = s[j] / d.sigma[j] - d.center[j];
      for (const auto& e : d.matrix.entries) g[e.row] += e.value * s[e.col];
      for (std::size_t i = 0; i < d.rhs.size(); ++i) g[i] += d.rhs[i];
      return g;
    }
  }
  return g;
}

/// Strongly convex chain instance on a cycle:
///   f(x) = sum_i 1/2 (sqrt(mu) x_i - b_i)^2 + sum_i 1/2 (x_i - x_{i+1 mod N})^2,
/// plus lambda |x|_1. Every block is read by its own residual (L = mu) and two
/// edges (L = 2 each), so W = (mu + 4) I, and the Hessian mu I + (cycle
/// Laplacian) has smallest eigenvalue mu: sigma_W = mu / (mu + 4).
inline ProblemData cycle_instance(std::size_t n, double mu, double lambda, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  ProblemData d;
  d.kind = ProblemKind::Lasso;
  d.lambda = lambda;
  d.matrix.rows = 2 * n;
  d.matrix.cols = n;
  const double s = std::sqrt(mu);
  for (std::size_t i = 0; i < n; ++i) {
    d.matrix.entries.push_back({i, i, s});
    d.rhs.push_back(3.0 * rng.normal());
  }
  for (std::size_t i = 0; i < n; ++i) {
    d.matrix.entries.push_back({n + i, i, 1.0});
    d.matrix.entries.push_back({n + i, (i + 1) % n, -1.0});
    d.rhs.push_back(0.0);
  }
  return d;
}

inline double cycle_sigma_w(double mu) { return mu / (mu + 4.0); }

/// Random point, projected onto dom Psi.
inline std::vector<double> random_point(const CompositeProblem& problem, Xoshiro256& rng, double scale = 1.0) {
  std::vector<double> x(problem.dimension());
  for (auto& v : x) v = scale * rng.normal();
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    project_to_domain(problem.regularizers()[i], problem.partition().block(std::span<double>(x), i));
  }
  return x;
}

/// Mixed pool of small instances: lasso (plain, boxed, blocked, block-angular),
/// logistic and dual. `count` instances, cycling through the families.
inline std::vector<ProblemData> mixed_instances(std::size_t count, std::uint64_t seed) {
  std::vector<ProblemData> out;
  for (std::size_t t = 0; t < count; ++t) {
    const std::uint64_t s = seed * 1000 + t;
    switch (t % 5) {
      case 0: {
        LassoOptions o;
        o.m = 60 + 7 * t;
        o.n = 80 + 5 * t;
        o.sparsity = 0.08;
        o.lambda = 0.5;
        o.seed = s;
        out.push_back(generate_lasso(o));
        break;
      }
      case 1: {
        LassoOptions o;
        o.m = 120;
        o.n = 90;
        o.sparsity = 0.06;
        o.lambda = 0.3;
        o.box = Box{-1.0, 1.5};
        o.block_size = 1 + t % 3;
        o.seed = s;
        out.push_back(generate_lasso(o));
        break;
      }
      case 2: {
        LogisticOptions o;
        o.samples = 150;
        o.n = 70 + 3 * t;
        o.sparsity = 0.08;
        o.lambda = 0.01;
        o.block_size = 1 + t % 2;
        o.seed = s;
        out.push_back(generate_logistic(o));
        break;
      }
      case 3: {
        DualOptions o;
        o.n = 40 + t;
        o.pattern = t % 2 ? SparsityPattern::BlockAngular : SparsityPattern::Uniform;
        o.m = 50;
        o.sparsity = 0.1;
        o.block_size = 1 + t % 2;
        o.seed = s;
        out.push_back(generate_dual(o));
        break;
      }
      default: {
        LassoOptions o;
        o.n = 100;
        o.pattern = SparsityPattern::BlockAngular;
        o.group_size = 10;
        o.lambda = 0.2;
        o.seed = s;
        out.push_back(generate_lasso(o));
        break;
      }
    }
  }
  return out;
}

/// Golden-section minimizer of a convex scalar function on [lo, hi]. The
/// comparison uses `diff(a, b)` = phi(a) - phi(b) so that it can be evaluated
/// without cancellation near the minimum.
template <typename Diff>
double golden_section(Diff diff, double lo, double hi, int iters = 400) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int it = 0; it < iters && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (diff(c, d) <= 0.0) {
      b = d;
      d = c;
      c = b - r * (b - a);
    } else {
      a = c;
      c = d;
      d = a + r * (b - a);
    }
  }
  return 0.5 * (a + b);
}

/// Optimal value of the tiny primal QP
///   min sum_j sigma_j/2 (u_j - c_j)^2  s.t.  A u <= b
/// by enumerating active sets and solving the KKT system of each.
inline double primal_qp_by_active_sets(const ProblemData& d) {
  const auto n = static_cast<Eigen::Index>(d.matrix.rows);
  const auto m = static_cast<Eigen::Index>(d.matrix.cols);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, m);
  for (const auto& e : d.matrix.entries) a(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (mask & (1u << r)) act.push_back(r);
    }
    const auto k = static_cast<Eigen::Index>(act.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + k, m + k);
    Eigen::VectorXd rhs(m + k);
    for (Eigen::Index j = 0; j < m; ++j) {
      kkt(j, j) = d.sigma[static_cast<std::size_t>(j)];
      rhs(j) = d.sigma[static_cast<std::size_t>(j)] * d.center[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index q = 0; q < k; ++q) {
      for (Eigen::Index j = 0; j < m; ++j) {
        kkt(m + q, j) = a(act[static_cast<std::size_t>(q)], j);
        kkt(j, m + q) = a(act[static_cast<std::size_t>(q)], j);
      }
      rhs(m + q) = d.rhs[static_cast<std::size_t>(act[static_cast<std::size_t>(q)])];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd u = sol.head(m);
    bool ok = true;
    for (Eigen::Index q = 0; q < k; ++q) ok = ok && sol(m + q) >= -1e-12;
    const Eigen::VectorXd slack = a * u;
    for (Eigen::Index r = 0; r < n; ++r) ok = ok && slack(r) <= d.rhs[static_cast<std::size_t>(r)] + 1e-12;
    if (!ok) continue;
    double v = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double diff = u(j) - d.center[static_cast<std::size_t>(j)];
      v += 0.5 * d.sigma[static_cast<std::size_t>(j)] * diff * diff;
    }
    best = std::min(best, v);
  }
  return best;
}

}  // namespace prcd::fixtures
