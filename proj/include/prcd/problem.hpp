#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prcd/error.hpp"
#include "prcd/prox.hpp"
#include "prcd/smooth.hpp"
#include "prcd/structure.hpp"

namespace prcd {

/// F(x) = sum_j f_j(x_{N_j}) + sum_i Psi_i(x_i) together with its incidence
/// structure and stepsize matrix W. Immutable after construction; all queries
/// are const and re-entrant.
class CompositeProblem {
 public:
  /// Where block i appears inside component j: (j, position of i in N_j).
  struct BlockTerm {
    std::size_t component;
    std::size_t local_block;
  };

  CompositeProblem(BlockPartition partition, std::vector<SmoothComponent> smooth,
                   std::vector<RegularizerSpec> regularizers,
                   std::optional<WeightMatrix> weight_override = std::nullopt)
      : partition_(std::move(partition)), smooth_(std::move(smooth)), regularizers_(std::move(regularizers)) {
    const std::size_t N = partition_.num_blocks();
    if (N == 0) throw InputError("problem has no blocks");
    if (smooth_.empty()) throw StructuralError("problem has no smooth component");
    if (regularizers_.size() != N) {
      throw InputError("expected one regularizer per block (" + std::to_string(N) + "), got " +
                       std::to_string(regularizers_.size()));
    }
    for (std::size_t i = 0; i < N; ++i) regularizers_[i].validate(partition_.size(i));

    std::vector<std::pair<std::size_t, std::size_t>> incidence;
    for (std::size_t j = 0; j < smooth_.size(); ++j) {
      for (std::size_t b : smooth_[j].blocks()) {
        if (b >= N) throw InputError("component " + std::to_string(j) + " references block outside partition");
        incidence.emplace_back(j, b);
      }
    }
    structure_ = build_structure(incidence, N, smooth_.size());

    std::vector<double> lipschitz;
    lipschitz.reserve(smooth_.size());
    for (const auto& c : smooth_) lipschitz.push_back(c.lipschitz());
    if (weight_override) {
      if (weight_override->size() != N) throw InputError("weight override has wrong size");
      for (double w : weight_override->diag) {
        if (!(w > 0.0) || !std::isfinite(w)) throw InputError("weight override entries must be positive");
      }
      weights_ = *weight_override;
    } else {
      weights_ = compute_weight_matrix(structure_, lipschitz);
    }

    terms_.assign(N, {});
    coordinate_lipschitz_.assign(N, 0.0);
    cache_offsets_.assign(smooth_.size() + 1, 0);
    for (std::size_t j = 0; j < smooth_.size(); ++j) {
      const auto& blocks = smooth_[j].blocks();
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        terms_[blocks[k]].push_back({j, k});
        coordinate_lipschitz_[blocks[k]] += smooth_[j].block_lipschitz(k);
      }
      cache_offsets_[j + 1] = cache_offsets_[j] + smooth_[j].inner_dim();
    }
  }

  const BlockPartition& partition() const { return partition_; }
  const BipartiteStructure& structure() const { return structure_; }
  const WeightMatrix& weights() const { return weights_; }
  const std::vector<SmoothComponent>& smooth() const { return smooth_; }
  const std::vector<RegularizerSpec>& regularizers() const { return regularizers_; }
  std::size_t num_blocks() const { return partition_.num_blocks(); }
  std::size_t num_components() const { return smooth_.size(); }
  std::size_t dimension() const { return partition_.dimension(); }
  std::size_t omega() const { return structure_.omega; }
  std::size_t omega_bar() const { return structure_.omega_bar; }
  const std::vector<BlockTerm>& terms(std::size_t block) const { return terms_[block]; }

  /// L_i of the coordinate-wise Lipschitz assumption, summed over the components
  /// reading block i. Exact for scalar blocks; for wider blocks it is the sum of
  /// per-component spectral bounds (an upper bound of the block-column norm).
  const std::vector<double>& coordinate_lipschitz() const { return coordinate_lipschitz_; }

  /// Layout of the flat inner-value cache: component j owns
  /// [cache_offset(j), cache_offset(j+1)).
  std::size_t cache_offset(std::size_t j) const { return cache_offsets_[j]; }
  std::size_t cache_size() const { return cache_offsets_.back(); }

  void check_point(std::span<const double> x) const {
    if (x.size() != dimension()) {
      throw InputError("point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(dimension()));
    }
    for (std::size_t r = 0; r < x.size(); ++r) {
      if (!std::isfinite(x[r])) throw InputError("non-finite entry at coordinate " + std::to_string(r));
    }
  }

  /// Inner values of every component at x, laid out per cache_offset.
  std::vector<double> inner_values(std::span<const double> x) const {
    std::vector<double> cache(cache_size());
    for (std::size_t j = 0; j < smooth_.size(); ++j) {
      smooth_[j].inner_from_point(partition_, x, component_slice(std::span<double>(cache), j));
    }
    return cache;
  }

  std::span<double> component_slice(std::span<double> cache, std::size_t j) const {
    return cache.subspan(cache_offsets_[j], smooth_[j].inner_dim());
  }
  std::span<const double> component_slice(std::span<const double> cache, std::size_t j) const {
    return cache.subspan(cache_offsets_[j], smooth_[j].inner_dim());
  }

  /// f(x).
  double smooth_value(std::span<const double> x) const {
    check_point(x);
    double total = 0.0;
    for (const auto& c : smooth_) total += c.value(partition_, x);
    return total;
  }

  /// Psi(x); +infinity if any block leaves its domain.
  double regularizer_value(std::span<const double> x) const {
    check_point(x);
    double total = 0.0;
    for (std::size_t i = 0; i < num_blocks(); ++i) {
      total += prcd::regularizer_value(regularizers_[i], partition_.block(x, i));
    }
    return total;
  }

  /// Partial gradient of f for block i from precomputed inner values.
  void partial_gradient_from_inner(std::span<const double> cache, std::size_t i, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    double buffer[8];
    std::vector<double> heap;
    for (const auto& t : terms_[i]) {
      const auto& c = smooth_[t.component];
      std::span<double> dphi;
      if (c.inner_dim() <= 8) {
        dphi = std::span<double>(buffer, c.inner_dim());
      } else {
        heap.resize(c.inner_dim());
        dphi = heap;
      }
      c.inner_gradient(component_slice(cache, t.component), dphi);
      c.add_block_gradient(t.local_block, dphi, out);
    }
  }

  /// Squared W-norm and W^{-1}-norm.
  double w_norm_squared(std::span<const double> v) const { return weighted_sq(v, false); }
  double w_norm(std::span<const double> v) const { return std::sqrt(w_norm_squared(v)); }
  double w_inv_norm_squared(std::span<const double> v) const { return weighted_sq(v, true); }
  double w_inv_norm(std::span<const double> v) const { return std::sqrt(w_inv_norm_squared(v)); }

 private:
  double weighted_sq(std::span<const double> v, bool inverse) const {
    double total = 0.0;
    for (std::size_t i = 0; i < num_blocks(); ++i) {
      double sq = 0.0;
      for (double e : partition_.block(v, i)) sq += e * e;
      total += inverse ? sq / weights_[i] : sq * weights_[i];
    }
    return total;
  }

  BlockPartition partition_;
  std::vector<SmoothComponent> smooth_;
  std::vector<RegularizerSpec> regularizers_;
  BipartiteStructure structure_;
  WeightMatrix weights_;
  std::vector<std::vector<BlockTerm>> terms_;
  std::vector<double> coordinate_lipschitz_;
  std::vector<std::size_t> cache_offsets_;
};

/// F(x) = f(x) + Psi(x). Returns +infinity when an indicator is violated;
/// throws InputError on NaN or a wrong-sized point.
inline double eval_objective(const CompositeProblem& problem, std::span<const double> x) {
  const double psi = problem.regularizer_value(x);
  if (std::isinf(psi)) return psi;
  return problem.smooth_value(x) + psi;
}

/// grad_i f(x) = sum over j in N̄_i of grad_i f_j(x_{N_j}).
inline std::vector<double> partial_gradient(const CompositeProblem& problem, std::span<const double> x,
                                            std::size_t block) {
  problem.check_point(x);
  if (block >= problem.num_blocks()) throw InputError("block index " + std::to_string(block) + " out of range");
  const auto& partition = problem.partition();
  std::vector<double> out(partition.size(block), 0.0);
  std::vector<double> z, dphi;
  for (const auto& t : problem.terms(block)) {
    const auto& c = problem.smooth()[t.component];
    z.assign(c.inner_dim(), 0.0);
    dphi.assign(c.inner_dim(), 0.0);
    c.inner_from_point(partition, x, z);
    c.inner_gradient(z, dphi);
    c.add_block_gradient(t.local_block, dphi, out);
  }
  return out;
}

inline std::vector<double> full_gradient(const CompositeProblem& problem, std::span<const double> x) {
  problem.check_point(x);
  const auto cache = problem.inner_values(x);
  std::vector<double> g(problem.dimension(), 0.0);
  for (std::size_t i = 0; i < problem.num_blocks(); ++i) {
    problem.partial_gradient_from_inner(cache, i, problem.partition().block(std::span<double>(g), i));
  }
  return g;
}

}  // namespace prcd
