#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "prcd/error.hpp"
#include "prcd/problem.hpp"
#include "prcd/prox.hpp"
#include "prcd/sampling.hpp"
#include "prcd/worker_pool.hpp"

namespace prcd {

enum class SolverMode {
  PRCD,          // sampled blocks, stepsizes from W
  PCDM1Ref,      // sampled blocks, stepsizes min(omega, tau) * L_i
  FullProxGrad,  // every block every iteration, stepsizes from W
};

enum class StopRule {
  MappingNorm,   // |grad^+ F(x)|_W <= tolerance, checked every check_stride iterations
  Gap,           // F(x) - f_star <= tolerance
  IterationCap,  // run max_iters iterations
};

inline const char* to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::PRCD: return "prcd";
    case SolverMode::PCDM1Ref: return "pcdm1";
    case SolverMode::FullProxGrad: return "full";
  }
  return "?";
}

struct SolverConfig {
  SolverMode mode = SolverMode::PRCD;
  SamplerConfig sampler;
  std::size_t max_iters = 10000;
  StopRule stop = StopRule::IterationCap;
  double tolerance = 0.0;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  std::size_t workers = 1;
  /// 0 selects ceil(10 N / tau).
  std::size_t check_stride = 0;
  /// Record every log_stride iterations (plus the first and last); 0 records only those two.
  std::size_t log_stride = 1;
  /// Recompute caches and F from scratch every refresh_stride iterations (0 disables).
  std::size_t refresh_stride = 1000;
  bool record_mapping_norm = true;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double objective = 0.0;
  double mapping_norm = std::numeric_limits<double>::quiet_NaN();
  std::size_t blocks_updated = 0;
  std::size_t coordinate_updates = 0;
  double elapsed_seconds = 0.0;
};

using Trace = std::vector<TraceRecord>;

namespace detail {

struct StepScratch {
  std::vector<double> deltas;
  std::vector<std::size_t> delta_offsets;
  std::vector<std::uint64_t> stamps;
  std::uint64_t stamp = 0;
  std::vector<std::vector<std::size_t>> touched;
  std::vector<double> psi_change;
  std::vector<double> f_change;
  std::vector<std::vector<double>> block_buffers;
};

}  // namespace detail

/// Iterate plus everything the solver maintains incrementally. The inner-value
/// cache holds M_j^T x_{N_j} for every component (residuals a^T x for least
/// squares, margins <a, x> for logistic, -A_j^T x and <b̄_j, x> for dual terms).
struct SolverState {
  std::vector<double> x;
  std::vector<double> inner;
  double objective = 0.0;
  std::size_t iteration = 0;
  std::size_t coordinate_updates = 0;
  detail::StepScratch scratch;
};

/// Initial state at x0. Blocks outside dom Psi_i are projected onto it first.
inline SolverState make_state(const CompositeProblem& problem, std::span<const double> x0) {
  problem.check_point(x0);
  SolverState state;
  state.x.assign(x0.begin(), x0.end());
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    project_to_domain(problem.regularizers()[i], problem.partition().block(std::span<double>(state.x), i));
  }
  state.inner = problem.inner_values(state.x);
  double f = 0.0;
  for (std::size_t j = 0; j < problem.num_components(); ++j) {
    f += problem.smooth()[j].value_from_inner(problem.component_slice(std::span<const double>(state.inner), j));
  }
  state.objective = f + problem.regularizer_value(state.x);
  state.scratch.stamps.assign(problem.num_components(), 0);
  return state;
}

/// Recomputes the cache and F from x. With `check`, throws InternalError if the
/// cache had drifted by more than 1e-8 (relative, floor 1) from the fresh values.
inline void refresh_state(const CompositeProblem& problem, SolverState& state, bool check = true) {
  auto fresh = problem.inner_values(state.x);
  if (check) {
    for (std::size_t j = 0; j < problem.num_components(); ++j) {
      const auto cached = problem.component_slice(std::span<const double>(state.inner), j);
      const auto now = problem.component_slice(std::span<const double>(fresh), j);
      for (std::size_t l = 0; l < now.size(); ++l) {
        if (std::abs(cached[l] - now[l]) > 1e-8 * std::max(1.0, std::abs(now[l]))) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "inner-value cache inconsistent at iteration " << state.iteration << ": component " << j
              << " (" << to_string(problem.smooth()[j].kind()) << "), entry " << l << ", cached " << cached[l]
              << ", recomputed " << now[l];
          throw InternalError(msg.str());
        }
      }
    }
  }
  state.inner = std::move(fresh);
  double f = 0.0;
  for (std::size_t j = 0; j < problem.num_components(); ++j) {
    f += problem.smooth()[j].value_from_inner(problem.component_slice(std::span<const double>(state.inner), j));
  }
  state.objective = f + problem.regularizer_value(state.x);
}

/// Stepsizes of the PCDM1 reference method: min(omega, tau) * L_i.
inline std::vector<double> pcdm1_weights(const CompositeProblem& problem, std::size_t tau) {
  const double beta = static_cast<double>(std::min(problem.omega(), tau));
  std::vector<double> w = problem.coordinate_lipschitz();
  for (double& v : w) v *= beta;
  return w;
}

namespace detail {

/// x_i <- prox_i(x_i - grad_i f(x)/w_i) for i in S, all gradients read from the
/// pre-step cache. Blocks of S are split across workers; cache updates are
/// applied per component by its owning worker (j mod P) in ascending order of
/// S, so x and the cache are identical for any worker count.
inline void step_with_weights(const CompositeProblem& problem, SolverState& state,
                              std::span<const std::size_t> blocks, std::span<const double> weights,
                              WorkerPool* pool) {
  if (blocks.empty()) return;
  const auto& partition = problem.partition();
  const std::size_t P = pool ? pool->size() : 1;
  auto& s = state.scratch;
  if (s.stamps.size() != problem.num_components()) s.stamps.assign(problem.num_components(), 0);

  s.delta_offsets.resize(blocks.size() + 1);
  s.delta_offsets[0] = 0;
  for (std::size_t idx = 0; idx < blocks.size(); ++idx) {
    const std::size_t i = blocks[idx];
    if (i >= problem.num_blocks()) throw InputError("block index " + std::to_string(i) + " out of range");
    s.delta_offsets[idx + 1] = s.delta_offsets[idx] + partition.size(i);
  }
  s.deltas.resize(s.delta_offsets.back());
  s.psi_change.assign(P, 0.0);
  s.f_change.assign(P, 0.0);
  s.touched.resize(P);
  s.block_buffers.resize(P);
  const std::uint64_t stamp = ++s.stamp;

  auto update_blocks = [&](std::size_t w) {
    const std::size_t chunk = (blocks.size() + P - 1) / P;
    const std::size_t begin = std::min(blocks.size(), w * chunk);
    const std::size_t end = std::min(blocks.size(), begin + chunk);
    auto& buf = s.block_buffers[w];
    double psi = 0.0;
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t i = blocks[idx];
      const double wi = weights[i];
      auto xi = partition.block(std::span<double>(state.x), i);
      buf.resize(xi.size());
      problem.partial_gradient_from_inner(state.inner, i, buf);
      for (std::size_t r = 0; r < xi.size(); ++r) buf[r] = xi[r] - buf[r] / wi;
      const auto& reg = problem.regularizers()[i];
      prox_block(reg, buf, wi, buf);
      psi -= regularizer_value(reg, xi);
      psi += regularizer_value(reg, buf);
      double* delta = s.deltas.data() + s.delta_offsets[idx];
      for (std::size_t r = 0; r < xi.size(); ++r) {
        delta[r] = buf[r] - xi[r];
        xi[r] = buf[r];
      }
    }
    s.psi_change[w] = psi;
  };

  auto update_cache = [&](std::size_t w) {
    auto& touched = s.touched[w];
    touched.clear();
    double df = 0.0;
    for (std::size_t idx = 0; idx < blocks.size(); ++idx) {
      const std::size_t i = blocks[idx];
      const std::span<const double> delta(s.deltas.data() + s.delta_offsets[idx], partition.size(i));
      for (const auto& t : problem.terms(i)) {
        const std::size_t j = t.component;
        if (j % P != w) continue;
        const auto& c = problem.smooth()[j];
        auto z = problem.component_slice(std::span<double>(state.inner), j);
        if (s.stamps[j] != stamp) {
          s.stamps[j] = stamp;
          touched.push_back(j);
          df -= c.value_from_inner(z);
        }
        c.add_block_delta(t.local_block, delta, z);
      }
    }
    for (std::size_t j : touched) {
      df += problem.smooth()[j].value_from_inner(problem.component_slice(std::span<const double>(state.inner), j));
    }
    s.f_change[w] = df;
  };

  if (pool && P > 1) {
    pool->run(update_blocks);
    pool->run(update_cache);
  } else {
    update_blocks(0);
    update_cache(0);
  }

  double change = 0.0;
  for (std::size_t w = 0; w < P; ++w) change += s.psi_change[w];
  for (std::size_t w = 0; w < P; ++w) change += s.f_change[w];
  state.objective += change;
  ++state.iteration;
  state.coordinate_updates += blocks.size();
}

}  // namespace detail

/// One P-RCD iteration on the index set S (stepsizes from W). An empty S leaves
/// the state unchanged.
inline void step(const CompositeProblem& problem, SolverState& state, std::span<const std::size_t> blocks,
                 WorkerPool* pool = nullptr) {
  detail::step_with_weights(problem, state, blocks, problem.weights().diag, pool);
}

/// One PCDM1 reference iteration: same update with w_i replaced by min(omega, tau) L_i.
inline void step_pcdm1(const CompositeProblem& problem, SolverState& state, std::span<const std::size_t> blocks,
                       std::size_t tau, WorkerPool* pool = nullptr) {
  const auto w = pcdm1_weights(problem, tau);
  detail::step_with_weights(problem, state, blocks, w, pool);
}

/// |grad^+ F(x)|_W evaluated from the state's cache.
inline double mapping_norm(const CompositeProblem& problem, const SolverState& state) {
  const auto& partition = problem.partition();
  std::vector<double> buf;
  double total = 0.0;
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    const double wi = problem.weights()[i];
    const auto xi = partition.block(std::span<const double>(state.x), i);
    buf.resize(xi.size());
    problem.partial_gradient_from_inner(state.inner, i, buf);
    for (std::size_t r = 0; r < xi.size(); ++r) buf[r] = xi[r] - buf[r] / wi;
    prox_block(problem.regularizers()[i], buf, wi, buf);
    double sq = 0.0;
    for (std::size_t r = 0; r < xi.size(); ++r) sq += (xi[r] - buf[r]) * (xi[r] - buf[r]);
    total += wi * sq;
  }
  return std::sqrt(total);
}

enum class RunStatus { Converged, IterationLimit };

inline const char* to_string(RunStatus status) {
  return status == RunStatus::Converged ? "converged" : "iteration_limit";
}

struct RunResult {
  SolverState state;
  Trace trace;
  RunStatus status = RunStatus::IterationLimit;
};

inline void validate(const SolverConfig& config, std::size_t num_blocks) {
  if (config.workers < 1) throw InputError("workers must be >= 1");
  if (config.mode != SolverMode::FullProxGrad) {
    if (config.sampler.tau < 1 || config.sampler.tau > num_blocks) {
      throw InputError("tau must lie in [1, N]; got " + std::to_string(config.sampler.tau));
    }
  }
  if (config.stop != StopRule::IterationCap && !(config.tolerance >= 0.0)) {
    throw InputError("stopping tolerance must be >= 0");
  }
  if (config.stop == StopRule::Gap && !std::isfinite(config.f_star)) {
    throw InputError("gap stopping rule needs a finite reference value f_star");
  }
}

/// Runs the configured method from x0 until the stop rule fires or max_iters is
/// reached. Reaching max_iters is reported through RunStatus, not an exception.
inline RunResult run(const CompositeProblem& problem, const SolverConfig& config, std::span<const double> x0) {
  const std::size_t N = problem.num_blocks();
  validate(config, N);
  const bool full = config.mode == SolverMode::FullProxGrad;
  const std::size_t tau = full ? N : config.sampler.tau;

  RunResult result;
  result.state = make_state(problem, x0);
  auto& state = result.state;

  std::optional<Sampler> sampler;
  if (!full) sampler.emplace(config.sampler, N);
  const std::vector<double> weights =
      config.mode == SolverMode::PCDM1Ref ? pcdm1_weights(problem, tau) : problem.weights().diag;
  WorkerPool pool(config.workers);
  const std::size_t check_stride =
      config.check_stride > 0 ? config.check_stride : std::max<std::size_t>(1, (10 * N + tau - 1) / tau);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  auto record = [&](std::size_t blocks_updated, std::optional<double> norm) {
    TraceRecord r;
    r.iteration = state.iteration;
    r.objective = state.objective;
    if (norm) {
      r.mapping_norm = *norm;
    } else if (config.record_mapping_norm) {
      r.mapping_norm = mapping_norm(problem, state);
    }
    r.blocks_updated = blocks_updated;
    r.coordinate_updates = state.coordinate_updates;
    r.elapsed_seconds = elapsed();
    result.trace.push_back(r);
  };

  auto converged = [&](std::size_t k, std::optional<double>& norm) {
    switch (config.stop) {
      case StopRule::Gap: return state.objective - config.f_star <= config.tolerance;
      case StopRule::MappingNorm:
        if (k % check_stride != 0) return false;
        norm = mapping_norm(problem, state);
        return *norm <= config.tolerance;
      case StopRule::IterationCap: return false;
    }
    return false;
  };

  {
    std::optional<double> norm;
    const bool done = converged(0, norm);
    record(0, norm);
    if (done) {
      result.status = RunStatus::Converged;
      return result;
    }
  }

  std::vector<std::size_t> blocks;
  if (full) {
    blocks.resize(N);
    std::iota(blocks.begin(), blocks.end(), std::size_t{0});
  }
  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    if (!full) sampler->draw(blocks);
    detail::step_with_weights(problem, state, blocks, weights, &pool);
    if (config.refresh_stride > 0 && k % config.refresh_stride == 0) refresh_state(problem, state, true);

    std::optional<double> norm;
    const bool done = converged(k, norm);
    const bool last = done || k == config.max_iters;
    if (last || (config.log_stride > 0 && k % config.log_stride == 0)) record(blocks.size(), norm);
    if (done) {
      result.status = RunStatus::Converged;
      break;
    }
  }
  return result;
}

}  // namespace prcd
