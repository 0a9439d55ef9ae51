#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prcd/error.hpp"

namespace prcd {

/// Split of R^n into N consecutive blocks x_i of size n_i.
class BlockPartition {
 public:
  BlockPartition() = default;

  explicit BlockPartition(std::vector<std::size_t> block_sizes)
      : sizes_(std::move(block_sizes)), offsets_(sizes_.size() + 1, 0) {
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (sizes_[i] == 0) throw InputError("block " + std::to_string(i) + " has size 0");
      offsets_[i + 1] = offsets_[i] + sizes_[i];
    }
  }

  /// n scalar blocks.
  static BlockPartition scalar(std::size_t n) { return BlockPartition(std::vector<std::size_t>(n, 1)); }

  /// Blocks of `block_size` covering n coordinates; the last block takes the remainder.
  static BlockPartition uniform(std::size_t n, std::size_t block_size) {
    if (block_size == 0) throw InputError("block size must be positive");
    std::vector<std::size_t> sizes;
    for (std::size_t start = 0; start < n; start += block_size) {
      sizes.push_back(std::min(block_size, n - start));
    }
    return BlockPartition(std::move(sizes));
  }

  std::size_t num_blocks() const { return sizes_.size(); }
  std::size_t dimension() const { return offsets_.empty() ? 0 : offsets_.back(); }
  std::size_t size(std::size_t block) const { return sizes_[block]; }
  std::size_t offset(std::size_t block) const { return offsets_[block]; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  const std::vector<std::size_t>& offsets() const { return offsets_; }

  /// Block containing global coordinate `coord`.
  std::size_t block_of(std::size_t coord) const {
    if (coord >= dimension()) {
      throw InputError("coordinate " + std::to_string(coord) + " outside dimension " +
                       std::to_string(dimension()));
    }
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), coord);
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
  }

  std::span<double> block(std::span<double> x, std::size_t i) const {
    return x.subspan(offsets_[i], sizes_[i]);
  }
  std::span<const double> block(std::span<const double> x, std::size_t i) const {
    return x.subspan(offsets_[i], sizes_[i]);
  }

  bool operator==(const BlockPartition&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
};

/// Function-variable incidence graph. Component j reads the blocks in
/// neighbors(j) = N_j; block i is read by the components in users(i) = N̄_i.
/// omega = max_j |N_j|, omega_bar = max_i |N̄_i|.
struct BipartiteStructure {
  std::size_t num_blocks = 0;
  std::size_t num_components = 0;
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<std::size_t>> users;
  std::size_t omega = 0;
  std::size_t omega_bar = 0;
};

/// Builds the structure from (component, block) incidence pairs, 0-based.
/// Duplicate pairs are merged. Throws InputError for out-of-range indices and
/// StructuralError for a component touching no block.
inline BipartiteStructure build_structure(std::span<const std::pair<std::size_t, std::size_t>> incidence,
                                          std::size_t num_blocks, std::size_t num_components) {
  BipartiteStructure s;
  s.num_blocks = num_blocks;
  s.num_components = num_components;
  s.neighbors.assign(num_components, {});
  s.users.assign(num_blocks, {});
  for (const auto& [j, i] : incidence) {
    if (j >= num_components) {
      throw InputError("incidence component index " + std::to_string(j) + " out of range [0, " +
                       std::to_string(num_components) + ")");
    }
    if (i >= num_blocks) {
      throw InputError("incidence block index " + std::to_string(i) + " out of range [0, " +
                       std::to_string(num_blocks) + ")");
    }
    s.neighbors[j].push_back(i);
  }
  for (std::size_t j = 0; j < num_components; ++j) {
    auto& nj = s.neighbors[j];
    if (nj.empty()) {
      throw StructuralError("smooth component " + std::to_string(j) + " touches no block");
    }
    std::sort(nj.begin(), nj.end());
    nj.erase(std::unique(nj.begin(), nj.end()), nj.end());
    for (std::size_t i : nj) s.users[i].push_back(j);  // j ascending, so users stay sorted
    s.omega = std::max(s.omega, nj.size());
  }
  for (const auto& ui : s.users) s.omega_bar = std::max(s.omega_bar, ui.size());
  return s;
}

/// Block-diagonal stepsize matrix, W_ii = w_i * I_{n_i}.
struct WeightMatrix {
  std::vector<double> diag;

  std::size_t size() const { return diag.size(); }
  double operator[](std::size_t i) const { return diag[i]; }
};

/// w_i = sum of L_{N_j} over the components j reading block i.
inline WeightMatrix compute_weight_matrix(const BipartiteStructure& structure,
                                          std::span<const double> lipschitz) {
  if (lipschitz.size() != structure.num_components) {
    throw InputError("expected " + std::to_string(structure.num_components) +
                     " Lipschitz constants, got " + std::to_string(lipschitz.size()));
  }
  for (std::size_t j = 0; j < lipschitz.size(); ++j) {
    if (!(lipschitz[j] > 0.0) || !std::isfinite(lipschitz[j])) {
      throw StructuralError("smooth component " + std::to_string(j) +
                            " has non-positive Lipschitz constant " + std::to_string(lipschitz[j]));
    }
  }
  WeightMatrix w;
  w.diag.assign(structure.num_blocks, 0.0);
  for (std::size_t i = 0; i < structure.num_blocks; ++i) {
    for (std::size_t j : structure.users[i]) w.diag[i] += lipschitz[j];
  }
  // A block no component reads has w_i = 0: the smooth part is flat there.
  // Callers that allow such blocks must provide an override.
  for (std::size_t i = 0; i < w.diag.size(); ++i) {
    if (!(w.diag[i] > 0.0)) {
      throw StructuralError("block " + std::to_string(i) + " is read by no smooth component (w_i = 0)");
    }
  }
  return w;
}

}  // namespace prcd
