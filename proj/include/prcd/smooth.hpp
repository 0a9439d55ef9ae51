#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prcd/error.hpp"
#include "prcd/structure.hpp"

namespace prcd {

enum class SmoothKind { QuadraticResidual, Logistic, QuadraticConjugateDual };

inline const char* to_string(SmoothKind kind) {
  switch (kind) {
    case SmoothKind::QuadraticResidual: return "quadratic_residual";
    case SmoothKind::Logistic: return "logistic";
    case SmoothKind::QuadraticConjugateDual: return "quadratic_conjugate_dual";
  }
  return "?";
}

/// Sparse vector entry over global coordinates.
struct SparseEntry {
  std::size_t index;
  double value;
};

/// Sparse matrix entry (row, col, value), 0-based.
struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

namespace detail {

/// Largest singular value squared of a dense row-major rows x cols matrix:
/// the top eigenvalue of the smaller Gram matrix, from a symmetric eigensolve.
inline double spectral_norm_squared(std::span<const double> m, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) return 0.0;
  using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Dense> a(m.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const Eigen::MatrixXd gram = cols <= rows ? Eigen::MatrixXd(a.transpose() * a) : Eigen::MatrixXd(a * a.transpose());
  if (gram.size() == 1) return gram(0, 0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues().maxCoeff());
}

}  // namespace detail

/// One term f_j of the partially separable smooth part.
///
/// Every supported family has the form f_j(x) = phi_j(M_j^T x_{N_j}) where M_j is a
/// dense (local dimension) x d_j coefficient matrix over the coordinates of the
/// blocks in N_j and phi_j is a closed-form function of d_j "inner" values:
///
///   QuadraticResidual       d = 1,     phi(t) = 1/2 (t - b)^2
///   Logistic                d = 1,     phi(t) = s log(1 + exp(-y t)),  s = 1/N̄
///   QuadraticConjugateDual  d = m + 1, phi(z, t) = |z|^2/(2 sigma) + <c, z> + t,
///                           z = -A_j^T x, t = <b̄_j, x>
///
/// The inner values are what the solver caches between iterations.
class SmoothComponent {
 public:
  SmoothKind kind() const { return kind_; }
  const std::vector<std::size_t>& blocks() const { return blocks_; }
  std::size_t inner_dim() const { return inner_dim_; }
  std::size_t local_dim() const { return local_offsets_.back(); }
  double lipschitz() const { return lipschitz_; }

  /// Offset of the k-th block of N_j within the local coordinate vector.
  std::size_t local_offset(std::size_t k) const { return local_offsets_[k]; }
  std::size_t local_block_size(std::size_t k) const { return local_offsets_[k + 1] - local_offsets_[k]; }

  double target() const { return target_; }
  double label() const { return label_; }
  double scale() const { return scale_; }
  double sigma() const { return sigma_; }
  const std::vector<double>& center() const { return center_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  /// phi_j at the inner values z.
  double value_from_inner(std::span<const double> z) const {
    switch (kind_) {
      case SmoothKind::QuadraticResidual: {
        const double r = z[0] - target_;
        return 0.5 * r * r;
      }
      case SmoothKind::Logistic: return scale_ * log1p_exp(-label_ * z[0]);
      case SmoothKind::QuadraticConjugateDual: {
        const std::size_t m = inner_dim_ - 1;
        double sq = 0.0, lin = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
          sq += z[l] * z[l];
          lin += center_[l] * z[l];
        }
        return sq / (2.0 * sigma_) + lin + z[m];
      }
    }
    return 0.0;
  }

  /// grad phi_j at the inner values z, written to out (size d_j).
  void inner_gradient(std::span<const double> z, std::span<double> out) const {
    switch (kind_) {
      case SmoothKind::QuadraticResidual: out[0] = z[0] - target_; return;
      case SmoothKind::Logistic:
        // d/dt s log(1+exp(-y t)) = -s y / (1 + exp(y t))
        out[0] = -scale_ * label_ * sigmoid(-label_ * z[0]);
        return;
      case SmoothKind::QuadraticConjugateDual: {
        const std::size_t m = inner_dim_ - 1;
        for (std::size_t l = 0; l < m; ++l) out[l] = z[l] / sigma_ + center_[l];
        out[m] = 1.0;
        return;
      }
    }
  }

  /// Inner values M_j^T x_{N_j} from a global point.
  void inner_from_point(const BlockPartition& partition, std::span<const double> x,
                        std::span<double> z) const {
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      add_block_delta(k, partition.block(x, blocks_[k]), z);
    }
  }

  /// z += M_{j,k}^T dx where M_{j,k} are the rows of block k of N_j.
  void add_block_delta(std::size_t k, std::span<const double> dx, std::span<double> z) const {
    const std::size_t base = local_offsets_[k];
    for (std::size_t r = 0; r < dx.size(); ++r) {
      const double d = dx[r];
      if (d == 0.0) continue;
      const double* row = coeffs_.data() + (base + r) * inner_dim_;
      for (std::size_t l = 0; l < inner_dim_; ++l) z[l] += row[l] * d;
    }
  }

  /// out += M_{j,k} dphi: contribution of f_j to the partial gradient of block k of N_j.
  void add_block_gradient(std::size_t k, std::span<const double> dphi, std::span<double> out) const {
    const std::size_t base = local_offsets_[k];
    for (std::size_t r = 0; r < out.size(); ++r) {
      const double* row = coeffs_.data() + (base + r) * inner_dim_;
      double s = 0.0;
      for (std::size_t l = 0; l < inner_dim_; ++l) s += row[l] * dphi[l];
      out[r] += s;
    }
  }

  double value(const BlockPartition& partition, std::span<const double> x) const {
    std::vector<double> z(inner_dim_);
    inner_from_point(partition, x, z);
    return value_from_inner(z);
  }

  /// Coordinate-wise constant of f_j restricted to block k of N_j, i.e. the
  /// contribution of f_j to L_i in the coordinate-wise Lipschitz assumption.
  double block_lipschitz(std::size_t k) const {
    const std::size_t rows = local_block_size(k);
    const std::size_t base = local_offsets_[k];
    switch (kind_) {
      case SmoothKind::QuadraticResidual:
      case SmoothKind::Logistic: {
        double sq = 0.0;
        for (std::size_t r = 0; r < rows; ++r) sq += coeffs_[base + r] * coeffs_[base + r];
        return kind_ == SmoothKind::Logistic ? sq * scale_ / 4.0 : sq;
      }
      case SmoothKind::QuadraticConjugateDual: {
        const std::size_t m = inner_dim_ - 1;
        std::vector<double> sub(rows * m);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t l = 0; l < m; ++l) sub[r * m + l] = coeffs_[(base + r) * inner_dim_ + l];
        }
        return detail::spectral_norm_squared(sub, rows, m) / sigma_;
      }
    }
    return 0.0;
  }

  static double log1p_exp(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  static double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
  }

 private:
  friend SmoothComponent make_quadratic_residual(const BlockPartition&, std::span<const SparseEntry>, double);
  friend SmoothComponent make_logistic(const BlockPartition&, std::span<const SparseEntry>, double,
                                       std::size_t);
  friend SmoothComponent make_quadratic_conjugate_dual(const BlockPartition&, std::span<const MatrixEntry>,
                                                       std::size_t, std::span<const SparseEntry>, double,
                                                       std::span<const double>);

  // Lays out the blocks touched by the given coordinates and returns, for each
  // coordinate, its local row.
  std::vector<std::size_t> layout(const BlockPartition& partition, std::span<const std::size_t> coords) {
    for (std::size_t c : coords) blocks_.push_back(partition.block_of(c));
    std::sort(blocks_.begin(), blocks_.end());
    blocks_.erase(std::unique(blocks_.begin(), blocks_.end()), blocks_.end());
    local_offsets_.assign(blocks_.size() + 1, 0);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      local_offsets_[k + 1] = local_offsets_[k] + partition.size(blocks_[k]);
    }
    std::vector<std::size_t> rows;
    rows.reserve(coords.size());
    for (std::size_t c : coords) {
      const std::size_t b = partition.block_of(c);
      const auto k = static_cast<std::size_t>(std::lower_bound(blocks_.begin(), blocks_.end(), b) - blocks_.begin());
      rows.push_back(local_offsets_[k] + (c - partition.offset(b)));
    }
    return rows;
  }

  SmoothKind kind_ = SmoothKind::QuadraticResidual;
  std::vector<std::size_t> blocks_;
  std::vector<std::size_t> local_offsets_{0};
  std::size_t inner_dim_ = 1;
  std::vector<double> coeffs_;
  double target_ = 0.0;
  double label_ = 1.0;
  double scale_ = 1.0;
  double sigma_ = 1.0;
  std::vector<double> center_;
  double lipschitz_ = 0.0;
};

namespace detail {

inline std::vector<SparseEntry> nonzero_entries(std::span<const SparseEntry> entries, std::size_t dim) {
  std::vector<SparseEntry> out;
  for (const auto& e : entries) {
    if (!std::isfinite(e.value)) throw InputError("non-finite coefficient at index " + std::to_string(e.index));
    if (e.index >= dim) {
      throw InputError("coefficient index " + std::to_string(e.index) + " outside dimension " + std::to_string(dim));
    }
    if (e.value != 0.0) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (out[k].index == out[k - 1].index) throw InputError("duplicate coefficient index " + std::to_string(out[k].index));
  }
  return out;
}

}  // namespace detail

/// f_j(x) = 1/2 (a^T x - b)^2 with L_{N_j} = |a|^2. Zero rows are rejected.
inline SmoothComponent make_quadratic_residual(const BlockPartition& partition, std::span<const SparseEntry> row,
                                               double b) {
  const auto entries = detail::nonzero_entries(row, partition.dimension());
  if (entries.empty()) throw StructuralError("quadratic residual row has no nonzero coefficient (L = 0)");
  if (!std::isfinite(b)) throw InputError("non-finite residual target");
  SmoothComponent c;
  c.kind_ = SmoothKind::QuadraticResidual;
  std::vector<std::size_t> coords;
  for (const auto& e : entries) coords.push_back(e.index);
  const auto rows = c.layout(partition, coords);
  c.inner_dim_ = 1;
  c.coeffs_.assign(c.local_dim(), 0.0);
  double sq = 0.0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    c.coeffs_[rows[k]] = entries[k].value;
    sq += entries[k].value * entries[k].value;
  }
  c.target_ = b;
  c.lipschitz_ = sq;
  return c;
}

/// f_j(x) = (1/N̄) log(1 + exp(-y <a, x>)) with L_{N_j} = |a|^2 / (4 N̄).
inline SmoothComponent make_logistic(const BlockPartition& partition, std::span<const SparseEntry> sample,
                                     double label, std::size_t sample_count) {
  if (label != 1.0 && label != -1.0) throw InputError("logistic label must be +1 or -1, got " + std::to_string(label));
  if (sample_count == 0) throw InputError("logistic sample count must be positive");
  const auto entries = detail::nonzero_entries(sample, partition.dimension());
  if (entries.empty()) throw StructuralError("logistic sample has no nonzero feature (L = 0)");
  SmoothComponent c;
  c.kind_ = SmoothKind::Logistic;
  std::vector<std::size_t> coords;
  for (const auto& e : entries) coords.push_back(e.index);
  const auto rows = c.layout(partition, coords);
  c.inner_dim_ = 1;
  c.coeffs_.assign(c.local_dim(), 0.0);
  double sq = 0.0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    c.coeffs_[rows[k]] = entries[k].value;
    sq += entries[k].value * entries[k].value;
  }
  c.label_ = label;
  c.scale_ = 1.0 / static_cast<double>(sample_count);
  c.lipschitz_ = sq * c.scale_ / 4.0;
  return c;
}

/// Negated dual term for a quadratic primal g_j(u) = (sigma/2)|u - c|^2:
///   f_j(x) = g_j^*(-A_j^T x) + <x, b̄_j>,   g_j^*(z) = |z|^2/(2 sigma) + <c, z>,
/// with L_{N_j} = |A_j|_2^2 / sigma. `column_block` holds the nonzeros of the
/// n x m block column A_j (row = global coordinate of x, col in [0, m)).
inline SmoothComponent make_quadratic_conjugate_dual(const BlockPartition& partition,
                                                     std::span<const MatrixEntry> column_block,
                                                     std::size_t primal_dim, std::span<const SparseEntry> bbar,
                                                     double sigma, std::span<const double> center) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("dual component needs sigma > 0, got " + std::to_string(sigma));
  if (primal_dim == 0) throw InputError("dual component needs a positive primal dimension");
  if (center.size() != primal_dim) {
    throw InputError("dual component center has size " + std::to_string(center.size()) + ", expected " +
                     std::to_string(primal_dim));
  }
  const std::size_t n = partition.dimension();
  std::vector<MatrixEntry> a;
  for (const auto& e : column_block) {
    if (e.row >= n || e.col >= primal_dim) throw InputError("dual block column entry out of range");
    if (!std::isfinite(e.value)) throw InputError("non-finite dual block column entry");
    if (e.value != 0.0) a.push_back(e);
  }
  if (a.empty()) throw StructuralError("dual component block column is zero (L = 0)");
  const auto b_entries = detail::nonzero_entries(bbar, n);

  SmoothComponent c;
  c.kind_ = SmoothKind::QuadraticConjugateDual;
  std::vector<std::size_t> coords;
  for (const auto& e : a) coords.push_back(e.row);
  for (const auto& e : b_entries) coords.push_back(e.index);
  const auto rows = c.layout(partition, coords);
  c.inner_dim_ = primal_dim + 1;
  c.coeffs_.assign(c.local_dim() * c.inner_dim_, 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    double& slot = c.coeffs_[rows[k] * c.inner_dim_ + a[k].col];
    if (slot != 0.0) throw InputError("duplicate dual block column entry");
    // Inner values z = -A^T x so that phi matches g^*(z) directly.
    slot = -a[k].value;
  }
  for (std::size_t k = 0; k < b_entries.size(); ++k) {
    c.coeffs_[rows[a.size() + k] * c.inner_dim_ + primal_dim] = b_entries[k].value;
  }
  c.sigma_ = sigma;
  c.center_.assign(center.begin(), center.end());

  std::vector<double> dense(c.local_dim() * primal_dim);
  for (std::size_t r = 0; r < c.local_dim(); ++r) {
    for (std::size_t l = 0; l < primal_dim; ++l) dense[r * primal_dim + l] = c.coeffs_[r * c.inner_dim_ + l];
  }
  c.lipschitz_ = detail::spectral_norm_squared(dense, c.local_dim(), primal_dim) / sigma;
  if (!(c.lipschitz_ > 0.0)) throw StructuralError("dual component has zero Lipschitz constant");
  return c;
}

}  // namespace prcd
