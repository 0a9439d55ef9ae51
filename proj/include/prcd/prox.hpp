#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "prcd/error.hpp"

namespace prcd {

enum class RegularizerKind { Zero, L1, Box, NonnegOrthant, L1Box };

inline const char* to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::Zero: return "zero";
    case RegularizerKind::L1: return "l1";
    case RegularizerKind::Box: return "box";
    case RegularizerKind::NonnegOrthant: return "nonneg";
    case RegularizerKind::L1Box: return "l1_box";
  }
  return "?";
}

/// Psi_i for one block: lambda |x_i|_1 and/or the indicator of a box, per kind.
/// Box bounds are per coordinate; empty bound vectors mean "not a box kind".
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::Zero;
  double lambda = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;

  static RegularizerSpec zero() { return {}; }
  static RegularizerSpec l1(double lambda) { return {RegularizerKind::L1, lambda, {}, {}}; }
  static RegularizerSpec nonneg() { return {RegularizerKind::NonnegOrthant, 0.0, {}, {}}; }
  static RegularizerSpec box(std::size_t block_size, double lb, double ub) {
    return {RegularizerKind::Box, 0.0, std::vector<double>(block_size, lb), std::vector<double>(block_size, ub)};
  }
  static RegularizerSpec l1_box(std::size_t block_size, double lambda, double lb, double ub) {
    return {RegularizerKind::L1Box, lambda, std::vector<double>(block_size, lb), std::vector<double>(block_size, ub)};
  }

  bool has_box() const { return kind == RegularizerKind::Box || kind == RegularizerKind::L1Box; }
  bool has_l1() const { return kind == RegularizerKind::L1 || kind == RegularizerKind::L1Box; }

  /// Throws InputError unless the regularizer is valid for a block of `block_size`.
  void validate(std::size_t block_size) const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("regularizer lambda must be finite and >= 0");
    if (has_box()) {
      if (lower.size() != block_size || upper.size() != block_size) {
        throw InputError("box bounds have size " + std::to_string(lower.size()) + "/" +
                         std::to_string(upper.size()) + ", expected " + std::to_string(block_size));
      }
      for (std::size_t r = 0; r < block_size; ++r) {
        if (std::isnan(lower[r]) || std::isnan(upper[r]) || lower[r] > upper[r]) {
          throw InputError("box bounds violate lb <= ub at coordinate " + std::to_string(r));
        }
      }
    }
  }
};

/// Psi_i(x_i); +infinity outside the domain.
inline double regularizer_value(const RegularizerSpec& spec, std::span<const double> x) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double l1 = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    switch (spec.kind) {
      case RegularizerKind::NonnegOrthant:
        if (x[r] < 0.0) return inf;
        break;
      case RegularizerKind::Box:
      case RegularizerKind::L1Box:
        if (x[r] < spec.lower[r] || x[r] > spec.upper[r]) return inf;
        break;
      default: break;
    }
    l1 += std::abs(x[r]);
  }
  return spec.has_l1() ? spec.lambda * l1 : 0.0;
}

inline double soft_threshold(double v, double threshold) {
  // |v| == threshold maps to 0
  if (v > threshold) return v - threshold;
  if (v < -threshold) return v + threshold;
  return 0.0;
}

/// argmin_u Psi_i(u) + (w/2)|u - v|^2, written into out (may alias v).
/// Each kind separates over coordinates. For L1Box the scalar objective is
/// convex, so its minimizer over [lb, ub] is the clamp of the unconstrained
/// minimizer, i.e. clamp(soft_threshold(v, lambda/w), lb, ub).
inline void prox_block(const RegularizerSpec& spec, std::span<const double> v, double weight, std::span<double> out) {
  const double threshold = spec.has_l1() ? spec.lambda / weight : 0.0;
  for (std::size_t r = 0; r < v.size(); ++r) {
    double u = v[r];
    switch (spec.kind) {
      case RegularizerKind::Zero: break;
      case RegularizerKind::L1: u = soft_threshold(u, threshold); break;
      case RegularizerKind::Box: u = std::clamp(u, spec.lower[r], spec.upper[r]); break;
      case RegularizerKind::NonnegOrthant: u = std::max(u, 0.0); break;
      case RegularizerKind::L1Box: u = std::clamp(soft_threshold(u, threshold), spec.lower[r], spec.upper[r]); break;
    }
    out[r] = u;
  }
}

inline double prox_scalar(const RegularizerSpec& spec, double v, double weight) {
  double out = 0.0;
  prox_block(spec, std::span<const double>(&v, 1), weight, std::span<double>(&out, 1));
  return out;
}

/// Projection of x_i onto dom Psi_i (identity for kinds with full domain).
inline void project_to_domain(const RegularizerSpec& spec, std::span<double> x) {
  for (std::size_t r = 0; r < x.size(); ++r) {
    if (spec.kind == RegularizerKind::NonnegOrthant) x[r] = std::max(x[r], 0.0);
    if (spec.has_box()) x[r] = std::clamp(x[r], spec.lower[r], spec.upper[r]);
  }
}

}  // namespace prcd
