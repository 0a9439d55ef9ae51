#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prcd/problem.hpp"
#include "prcd/prox.hpp"

namespace prcd {

/// T(x) = prox_Psi^W(x - W^{-1} grad f(x)), computed blockwise.
inline std::vector<double> proximal_step(const CompositeProblem& problem, std::span<const double> x) {
  const auto g = full_gradient(problem, x);
  const auto& partition = problem.partition();
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    const double w = problem.weights()[i];
    auto ti = partition.block(std::span<double>(t), i);
    const auto xi = partition.block(x, i);
    const auto gi = partition.block(std::span<const double>(g), i);
    for (std::size_t r = 0; r < ti.size(); ++r) ti[r] = xi[r] - gi[r] / w;
    prox_block(problem.regularizers()[i], ti, w, ti);
  }
  return t;
}

struct ProxGradMapping {
  std::vector<double> value;  // x - T(x)
  double w_norm = 0.0;
};

/// grad^+ F(x) = x - T(x) and its W-norm; zero exactly at minimizers.
inline ProxGradMapping prox_grad_mapping(const CompositeProblem& problem, std::span<const double> x) {
  ProxGradMapping out;
  out.value = proximal_step(problem, x);
  for (std::size_t r = 0; r < x.size(); ++r) out.value[r] = x[r] - out.value[r];
  out.w_norm = problem.w_norm(out.value);
  return out;
}

namespace detail {

/// t(x, y) = f(x) + <grad f(x), y - x> + 1/2 |y - x|_W^2 + Psi(y).
inline double model_value(const CompositeProblem& problem, std::span<const double> x, std::span<const double> y) {
  const auto g = full_gradient(problem, x);
  std::vector<double> d(x.size());
  double lin = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    d[r] = y[r] - x[r];
    lin += g[r] * d[r];
  }
  return problem.smooth_value(x) + lin + 0.5 * problem.w_norm_squared(d) + problem.regularizer_value(y);
}

}  // namespace detail

}  // namespace prcd
