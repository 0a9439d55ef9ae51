#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "prcd/error.hpp"
#include "prcd/rng.hpp"

namespace prcd {

enum class SamplingScheme { TauNiceUniform, PartitionShuffle };

struct SamplerConfig {
  SamplingScheme scheme = SamplingScheme::TauNiceUniform;
  std::size_t tau = 1;
  std::uint64_t seed = 0;
};

/// Draws the block index set S^k, |S^k| = tau, with P(i in S^k) = tau/N.
///
/// TauNiceUniform: every tau-subset is equally likely (partial Fisher-Yates
/// over a persistent permutation of [N]).
/// PartitionShuffle: each epoch shuffles [N], cuts it into N/tau cells and
/// hands them out in order.
class Sampler {
 public:
  Sampler(SamplerConfig config, std::size_t num_blocks)
      : config_(config), num_blocks_(num_blocks), rng_(config.seed), perm_(num_blocks) {
    if (num_blocks == 0) throw InputError("sampler needs at least one block");
    if (config.tau < 1 || config.tau > num_blocks) {
      throw InputError("tau must lie in [1, N]; got tau = " + std::to_string(config.tau) +
                       ", N = " + std::to_string(num_blocks));
    }
    if (config.scheme == SamplingScheme::PartitionShuffle && num_blocks % config.tau != 0) {
      throw InputError("partition-shuffle sampling needs tau to divide N");
    }
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    cursor_ = num_blocks_;  // forces a shuffle on the first partition draw
  }

  const SamplerConfig& config() const { return config_; }
  std::size_t num_blocks() const { return num_blocks_; }

  /// Next index set, sorted ascending.
  std::vector<std::size_t> draw() {
    std::vector<std::size_t> out;
    draw(out);
    return out;
  }

  void draw(std::vector<std::size_t>& out) {
    const std::size_t tau = config_.tau;
    out.resize(tau);
    if (config_.scheme == SamplingScheme::TauNiceUniform) {
      for (std::size_t k = 0; k < tau; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(rng_.bounded(num_blocks_ - k));
        std::swap(perm_[k], perm_[pick]);
        out[k] = perm_[k];
      }
    } else {
      if (cursor_ >= num_blocks_) {
        shuffle();
        cursor_ = 0;
      }
      std::copy_n(perm_.begin() + static_cast<std::ptrdiff_t>(cursor_), tau, out.begin());
      cursor_ += tau;
    }
    std::sort(out.begin(), out.end());
  }

 private:
  void shuffle() {
    for (std::size_t k = num_blocks_; k > 1; --k) {
      const auto pick = static_cast<std::size_t>(rng_.bounded(k));
      std::swap(perm_[k - 1], perm_[pick]);
    }
  }

  SamplerConfig config_;
  std::size_t num_blocks_;
  Xoshiro256 rng_;
  std::vector<std::size_t> perm_;
  std::size_t cursor_ = 0;
};

}  // namespace prcd
