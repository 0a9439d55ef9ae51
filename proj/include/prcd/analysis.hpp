#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prcd/error.hpp"
#include "prcd/problem.hpp"

namespace prcd {

/// Constants entering the convergence bounds for one problem/configuration.
///
/// radius is R_W(x0), the largest W-distance to the optimal set over the initial
/// sublevel set; it is rarely computable, and callers typically pass a surrogate
/// such as |x0 - x*|_W. gap0 is F(x0) - F*.
struct RateBundle {
  std::size_t num_blocks = 1;
  std::size_t tau = 1;
  double radius = 0.0;
  double gap0 = 0.0;
  std::optional<double> sigma_w;
  double kappa1 = 0.0;
  double kappa2 = 0.0;

  double n_over_tau() const { return static_cast<double>(num_blocks) / static_cast<double>(tau); }

  void validate() const {
    if (num_blocks == 0) throw InputError("rate bundle needs N >= 1");
    if (tau < 1 || tau > num_blocks) throw InputError("rate bundle needs 1 <= tau <= N");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw InputError("rate bundle needs a finite R_W >= 0");
    if (!(gap0 >= 0.0) || !std::isfinite(gap0)) throw InputError("rate bundle needs a finite initial gap >= 0");
  }
};

/// Expected-gap envelope after k iterations: N (R^2/2 + gap0) / (tau k + N).
inline double sublinear_bound(const RateBundle& b, double k) {
  b.validate();
  const double N = static_cast<double>(b.num_blocks);
  return N * (0.5 * b.radius * b.radius + b.gap0) / (static_cast<double>(b.tau) * k + N);
}

namespace detail {

/// Right-hand side of the high-probability iteration count for the sublinear
/// regime, with c = (2N/tau) max{R^2, gap0}. Unchecked.
inline double sublinear_confidence_rhs(const RateBundle& b, double eps, double rho) {
  const double nt = b.n_over_tau();
  const double r2 = b.radius * b.radius;
  const double c = 2.0 * nt * std::max(r2, b.gap0);
  const double log_arg = nt * (r2 + 2.0 * b.gap0) / (4.0 * c * rho);
  return c / eps * (1.0 + std::log(log_arg)) + 2.0 - static_cast<double>(b.num_blocks);
}

/// (1/(1 - theta)) log(gap0 / (eps rho)). Unchecked.
inline double gebp_confidence_rhs(double theta, double gap0, double eps, double rho) {
  return std::log(gap0 / (eps * rho)) / (1.0 - theta);
}

inline std::size_t ceil_nonnegative(double v) {
  if (!std::isfinite(v)) throw InputError("iteration count is not finite");
  return v <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(v));
}

inline void check_eps_rho(const RateBundle& b, double eps, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("confidence level rho must lie in (0, 1)");
  if (!(eps > 0.0)) throw InputError("suboptimality eps must be positive");
  if (!(eps < b.gap0)) throw InputError("suboptimality eps must be smaller than the initial gap F(x0) - F*");
}

}  // namespace detail

/// Smallest k for which P(F(x^k) - F* <= eps) >= 1 - rho is guaranteed in the
/// sublinear regime. Requires 0 < eps < gap0 and 0 < rho < 1.
inline std::size_t sublinear_confidence_iters(const RateBundle& b, double eps, double rho) {
  b.validate();
  detail::check_eps_rho(b, eps, rho);
  return detail::ceil_nonnegative(detail::sublinear_confidence_rhs(b, eps, rho));
}

/// Per-iteration contraction of the expected gap under strong convexity in the
/// W-norm: 1 - tau sigma_W / N. sigma_W must lie in (0, 1].
inline double strongly_convex_factor(const RateBundle& b) {
  b.validate();
  if (!b.sigma_w) throw InputError("strong convexity constant sigma_W is not set");
  const double s = *b.sigma_w;
  if (!(s > 0.0 && s <= 1.0)) throw InputError("sigma_W must lie in (0, 1]");
  return 1.0 - static_cast<double>(b.tau) * s / static_cast<double>(b.num_blocks);
}

/// Intermediate constants of the error-bound linear rate.
struct GebpRate {
  double c_kappa = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double theta = 0.0;
};

inline GebpRate gebp_linear_rate(const RateBundle& b) {
  b.validate();
  if (!(b.kappa1 >= 0.0) || !(b.kappa2 >= 0.0)) throw InputError("kappa1, kappa2 must be >= 0");
  if (b.kappa1 == 0.0 && b.kappa2 == 0.0) throw InputError("kappa1 and kappa2 cannot both be zero");
  const double ratio = static_cast<double>(b.tau) / static_cast<double>(b.num_blocks);
  GebpRate r;
  r.c_kappa = (b.kappa1 + b.kappa2 * b.radius * b.radius) * std::sqrt(1.0 / ratio);
  r.c1 = 1.0 + r.c_kappa;
  r.c2 = r.c1 + 0.5 * (1.0 - ratio) * r.c_kappa * r.c_kappa + r.c_kappa * std::sqrt(ratio);
  r.c3 = (2.0 * r.c2 + (1.0 - ratio)) / ratio;
  r.theta = r.c3 / (1.0 + r.c3);
  return r;
}

/// Linear rate theta in (0, 1) under the generalized error bound property.
inline double gebp_linear_theta(const RateBundle& b) { return gebp_linear_rate(b).theta; }

/// Smallest k with (1/(1 - theta)) log(gap0 / (eps rho)) <= k. Uses
/// 1/(1 - theta) = 1 + c3, which stays exact when theta is close to 1.
inline std::size_t gebp_confidence_iters(const RateBundle& b, double eps, double rho) {
  const auto rate = gebp_linear_rate(b);
  detail::check_eps_rho(b, eps, rho);
  return detail::ceil_nonnegative((1.0 + rate.c3) * std::log(b.gap0 / (eps * rho)));
}

/// |x - y|_W.
inline double w_distance(const CompositeProblem& problem, std::span<const double> x, std::span<const double> y) {
  std::vector<double> d(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) d[r] = x[r] - y[r];
  return problem.w_norm(d);
}

/// Dense Hessian of f when every component is quadratic; nullopt otherwise.
inline std::optional<Eigen::MatrixXd> quadratic_hessian(const CompositeProblem& problem) {
  const auto& partition = problem.partition();
  const auto n = static_cast<Eigen::Index>(problem.dimension());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (const auto& c : problem.smooth()) {
    double curvature = 1.0;
    std::size_t cols = 1;
    if (c.kind() == SmoothKind::Logistic) return std::nullopt;
    if (c.kind() == SmoothKind::QuadraticConjugateDual) {
      curvature = 1.0 / c.sigma();
      cols = c.inner_dim() - 1;  // last inner value is linear
    }
    std::vector<Eigen::Index> global;
    for (std::size_t k = 0; k < c.blocks().size(); ++k) {
      const std::size_t b = c.blocks()[k];
      for (std::size_t r = 0; r < partition.size(b); ++r) {
        global.push_back(static_cast<Eigen::Index>(partition.offset(b) + r));
      }
    }
    const auto& m = c.coefficients();
    const std::size_t d = c.inner_dim();
    for (std::size_t p = 0; p < global.size(); ++p) {
      for (std::size_t q = 0; q < global.size(); ++q) {
        double s = 0.0;
        for (std::size_t l = 0; l < cols; ++l) s += m[p * d + l] * m[q * d + l];
        h(global[p], global[q]) += curvature * s;
      }
    }
  }
  return h;
}

/// Strong convexity constant of f in the W-norm, i.e. the smallest eigenvalue
/// of W^{-1/2} H W^{-1/2}, by inverse power iteration. Only quadratic f has a
/// constant Hessian; otherwise InputError (supply sigma_W analytically).
/// Returns 0 when H is singular. Dense O(n^3): intended for small problems.
inline double estimate_sigma_w(const CompositeProblem& problem, int max_iters = 20000, double rel_tol = 1e-13) {
  auto h = quadratic_hessian(problem);
  if (!h) throw InputError("sigma_W can only be estimated for quadratic smooth parts; supply it explicitly");
  const auto& partition = problem.partition();
  const auto n = h->rows();
  Eigen::VectorXd scale(n);
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    for (std::size_t r = 0; r < partition.size(i); ++r) {
      scale(static_cast<Eigen::Index>(partition.offset(i) + r)) = 1.0 / std::sqrt(problem.weights()[i]);
    }
  }
  const Eigen::MatrixXd m = scale.asDiagonal() * (*h) * scale.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next = llt.solve(v);
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return 0.0;
    next /= norm;
    const double rayleigh = next.dot(m * next);
    const bool settled = it > 0 && std::abs(rayleigh - estimate) <= rel_tol * std::abs(rayleigh);
    estimate = rayleigh;
    v = next;
    if (settled) break;
  }
  return std::max(0.0, estimate);
}

}  // namespace prcd
