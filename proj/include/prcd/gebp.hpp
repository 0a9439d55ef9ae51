#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "prcd/error.hpp"
#include "prcd/problem.hpp"
#include "prcd/prox_mapping.hpp"

namespace prcd {

/// One observation of the error bound: d = |x - x̄|_W, g = |grad^+ F(x)|_W.
struct GebpSample {
  double distance = 0.0;
  double mapping_norm = 0.0;
};

struct GebpFit {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  /// max over samples of d - (kappa1 + kappa2 d^2) g; <= 0 when all are satisfied.
  double max_violation = 0.0;
  /// Samples with g = 0 but d > tolerance: no finite constants can cover them.
  std::vector<std::size_t> counter_witnesses;
  /// Largest d / g over the samples (the classical error-bound ratio).
  double max_classical_ratio = 0.0;
};

/// d - (kappa1 + kappa2 d^2) g.
inline double gebp_violation(const GebpSample& s, double kappa1, double kappa2) {
  return s.distance - (kappa1 + kappa2 * s.distance * s.distance) * s.mapping_norm;
}

/// Smallest (kappa1, kappa2) >= 0, by kappa1 + kappa2 and then by kappa2,
/// with d <= (kappa1 + kappa2 d^2) g on every sample.
///
/// Dividing by g, each sample is the half-plane kappa1 + q kappa2 >= r with
/// q = d^2, r = d/g. The feasible set is an unbounded convex polygon, so the
/// optimum is attained at a vertex: an intersection of two boundary lines, or
/// of one boundary line with an axis. All candidate vertices are enumerated.
inline GebpFit fit_gebp_constants(std::span<const GebpSample> samples, double tolerance = 1e-12) {
  GebpFit fit;
  struct Line {
    double q, r;
  };
  std::vector<Line> lines;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& e = samples[s];
    if (!(e.distance >= 0.0) || !(e.mapping_norm >= 0.0)) throw InputError("GEBP samples must be non-negative");
    if (e.distance <= tolerance) continue;  // 0 <= (...) g holds for any kappa
    if (e.mapping_norm == 0.0) {
      fit.counter_witnesses.push_back(s);
      continue;
    }
    const double r = e.distance / e.mapping_norm;
    fit.max_classical_ratio = std::max(fit.max_classical_ratio, r);
    lines.push_back({e.distance * e.distance, r});
  }

  if (!lines.empty()) {
    auto feasible = [&](double k1, double k2) {
      if (k1 < 0.0 || k2 < 0.0) return false;
      for (const auto& l : lines) {
        if (k1 + l.q * k2 < l.r * (1.0 - 1e-12)) return false;
      }
      return true;
    };
    bool found = false;
    double best1 = 0.0, best2 = 0.0;
    auto consider = [&](double k1, double k2) {
      if (!std::isfinite(k1) || !std::isfinite(k2) || !feasible(k1, k2)) return;
      const double obj = k1 + k2, best = best1 + best2;
      if (!found || obj < best * (1.0 - 1e-14) || (obj <= best * (1.0 + 1e-14) && k2 < best2)) {
        best1 = k1;
        best2 = k2;
        found = true;
      }
    };
    for (const auto& l : lines) {
      consider(l.r, 0.0);
      consider(0.0, l.r / l.q);
    }
    for (std::size_t a = 0; a < lines.size(); ++a) {
      for (std::size_t b = a + 1; b < lines.size(); ++b) {
        const double dq = lines[a].q - lines[b].q;
        if (dq == 0.0) continue;
        const double k2 = (lines[a].r - lines[b].r) / dq;
        const double k1 = lines[a].r - lines[a].q * k2;
        consider(k1, k2);
      }
    }
    if (!found) throw InternalError("GEBP fit found no feasible vertex");
    fit.kappa1 = best1;
    fit.kappa2 = best2;
  }

  fit.max_violation = samples.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const bool witness =
        std::find(fit.counter_witnesses.begin(), fit.counter_witnesses.end(), s) != fit.counter_witnesses.end();
    if (witness) continue;
    fit.max_violation = std::max(fit.max_violation, gebp_violation(samples[s], fit.kappa1, fit.kappa2));
  }
  return fit;
}

/// Projection onto the optimal set in the W-norm, x -> x̄.
using OptimalProjector = std::function<std::vector<double>(std::span<const double>)>;

/// Measures (d, g) at each sample point and fits the error-bound constants.
inline GebpFit estimate_gebp_constants(const CompositeProblem& problem, const OptimalProjector& project,
                                       std::span<const std::vector<double>> points, double tolerance = 1e-12) {
  std::vector<GebpSample> samples;
  samples.reserve(points.size());
  for (const auto& x : points) {
    const auto xbar = project(x);
    if (xbar.size() != x.size()) throw InputError("optimal-set projector returned a wrong-sized point");
    GebpSample s;
    std::vector<double> d(x.size());
    for (std::size_t r = 0; r < x.size(); ++r) d[r] = x[r] - xbar[r];
    s.distance = problem.w_norm(d);
    s.mapping_norm = prox_grad_mapping(problem, x).w_norm;
    samples.push_back(s);
  }
  return fit_gebp_constants(samples, tolerance);
}

}  // namespace prcd
