#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prcd/error.hpp"
#include "prcd/harness/matrix_io.hpp"
#include "prcd/problem.hpp"
#include "prcd/rng.hpp"

namespace prcd {

enum class ProblemKind { Lasso, Logistic, Dual };

inline const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Lasso: return "lasso";
    case ProblemKind::Logistic: return "logistic";
    case ProblemKind::Dual: return "dual";
  }
  return "?";
}

inline ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "lasso") return ProblemKind::Lasso;
  if (s == "logistic") return ProblemKind::Logistic;
  if (s == "dual") return ProblemKind::Dual;
  throw InputError("unknown problem kind '" + s + "' (expected lasso, logistic or dual)");
}

struct Box {
  double lower = 0.0;
  double upper = 0.0;
};

/// Serializable description of a problem instance.
///
///   Lasso:    F(x) = 1/2 |A x - b|^2 + lambda |x|_1 (+ box), A is m x n, rhs = b.
///   Logistic: F(x) = (1/m) sum_j log(1 + exp(-y_j <a_j, x>)) + lambda |x|_1,
///             rows of A are samples, rhs = labels y in {-1, +1}.
///   Dual:     primal min sum_j sigma_j/2 (u_j - c_j)^2 s.t. A u <= b with A n x m;
///             x in R^n_+ are the multipliers, rhs = b, one component per column.
struct ProblemData {
  ProblemKind kind = ProblemKind::Lasso;
  CoordinateMatrix matrix;
  std::vector<double> rhs;
  double lambda = 0.0;
  std::optional<Box> box;
  std::size_t block_size = 1;
  std::vector<double> sigma;   // dual: per column
  std::vector<double> center;  // dual: per column
  std::vector<double> planted; // generator ground truth, may be empty

  std::size_t dimension() const { return kind == ProblemKind::Dual ? matrix.rows : matrix.cols; }
};

/// Rows/columns that were dropped while building because they were identically zero.
struct BuildReport {
  std::size_t dropped_rows = 0;
};

namespace detail {

inline RegularizerSpec lasso_regularizer(const ProblemData& d, std::size_t block_size) {
  if (d.box) {
    if (d.lambda > 0.0) return RegularizerSpec::l1_box(block_size, d.lambda, d.box->lower, d.box->upper);
    return RegularizerSpec::box(block_size, d.box->lower, d.box->upper);
  }
  if (d.lambda > 0.0) return RegularizerSpec::l1(d.lambda);
  return RegularizerSpec::zero();
}

}  // namespace detail

/// Builds the composite problem. Identically zero rows of a lasso or logistic
/// matrix are dropped (their components would have L = 0); the number dropped
/// is reported through `report`.
inline CompositeProblem build_problem(const ProblemData& d, BuildReport* report = nullptr) {
  if (d.block_size == 0) throw InputError("block size must be positive");
  const std::size_t n = d.dimension();
  if (n == 0) throw InputError("problem has dimension 0");
  auto partition = BlockPartition::uniform(n, d.block_size);
  BuildReport local;
  std::vector<SmoothComponent> smooth;
  std::vector<RegularizerSpec> regs;

  switch (d.kind) {
    case ProblemKind::Lasso:
    case ProblemKind::Logistic: {
      if (d.rhs.size() != d.matrix.rows) throw InputError("right-hand side length does not match the row count");
      const auto rows = d.matrix.row_lists();
      std::size_t kept = 0;
      for (const auto& r : rows) {
        const bool nonzero = std::any_of(r.begin(), r.end(), [](const SparseEntry& e) { return e.value != 0.0; });
        kept += nonzero ? 1 : 0;
      }
      for (std::size_t j = 0; j < rows.size(); ++j) {
        const bool nonzero = std::any_of(rows[j].begin(), rows[j].end(), [](const SparseEntry& e) { return e.value != 0.0; });
        if (!nonzero) {
          ++local.dropped_rows;
          continue;
        }
        if (d.kind == ProblemKind::Lasso) {
          smooth.push_back(make_quadratic_residual(partition, rows[j], d.rhs[j]));
        } else {
          smooth.push_back(make_logistic(partition, rows[j], d.rhs[j], kept));
        }
      }
      if (d.kind == ProblemKind::Logistic && d.box) throw InputError("logistic problems take no box constraint");
      for (std::size_t i = 0; i < partition.num_blocks(); ++i) {
        regs.push_back(detail::lasso_regularizer(d, partition.size(i)));
      }
      break;
    }
    case ProblemKind::Dual: {
      if (d.rhs.size() != d.matrix.rows) throw InputError("dual right-hand side length does not match the row count");
      const std::size_t m = d.matrix.cols;
      if (d.sigma.size() != m || d.center.size() != m) throw InputError("dual problem needs sigma and c per column");
      const auto cols = d.matrix.column_lists();
      // b_i is shared equally by the components (columns) reading row i.
      std::vector<std::size_t> readers(n, 0);
      for (const auto& c : cols) {
        for (const auto& e : c) readers[e.index] += e.value != 0.0 ? 1 : 0;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (readers[i] == 0) throw StructuralError("dual matrix row " + std::to_string(i) + " is empty");
      }
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<MatrixEntry> block;
        std::vector<SparseEntry> bbar;
        for (const auto& e : cols[j]) {
          if (e.value == 0.0) continue;
          block.push_back({e.index, 0, e.value});
          bbar.push_back({e.index, d.rhs[e.index] / static_cast<double>(readers[e.index])});
        }
        if (block.empty()) throw StructuralError("dual matrix column " + std::to_string(j) + " is empty");
        const double c = d.center[j];
        smooth.push_back(make_quadratic_conjugate_dual(partition, block, 1, bbar, d.sigma[j], std::span<const double>(&c, 1)));
      }
      for (std::size_t i = 0; i < partition.num_blocks(); ++i) regs.push_back(RegularizerSpec::nonneg());
      break;
    }
  }
  if (report) *report = local;
  return CompositeProblem(std::move(partition), std::move(smooth), std::move(regs));
}

/// A problem description together with its built model.
struct Instance {
  ProblemData data;
  CompositeProblem problem;

  explicit Instance(ProblemData d) : data(std::move(d)), problem(build_problem(data)) {}
};

enum class SparsityPattern {
  Uniform,       // i.i.d. Bernoulli(sparsity) entries
  Diagonal,      // one entry per row on the diagonal (m = n)
  BlockAngular,  // per group of columns one linking row, plus one own row per column
};

inline SparsityPattern parse_pattern(const std::string& s) {
  if (s == "uniform") return SparsityPattern::Uniform;
  if (s == "diagonal") return SparsityPattern::Diagonal;
  if (s == "block_angular" || s == "block-angular") return SparsityPattern::BlockAngular;
  throw InputError("unknown sparsity pattern '" + s + "'");
}

inline const char* to_string(SparsityPattern p) {
  switch (p) {
    case SparsityPattern::Uniform: return "uniform";
    case SparsityPattern::Diagonal: return "diagonal";
    case SparsityPattern::BlockAngular: return "block_angular";
  }
  return "?";
}

struct LassoOptions {
  std::size_t m = 100;
  std::size_t n = 100;
  double sparsity = 0.05;
  double lambda = 1.0;
  std::optional<Box> box;
  std::size_t block_size = 1;
  SparsityPattern pattern = SparsityPattern::Uniform;
  std::size_t group_size = 10;   // BlockAngular only
  double noise = 0.1;
  double plant_density = 0.1;
  std::uint64_t seed = 1;
};

struct LogisticOptions {
  std::size_t samples = 100;
  std::size_t n = 50;
  double sparsity = 0.1;
  double lambda = 0.01;
  std::size_t block_size = 1;
  double flip_probability = 0.05;
  std::uint64_t seed = 1;
};

struct DualOptions {
  std::size_t n = 20;            // constraints = dual dimension
  std::size_t m = 20;            // primal variables = components
  SparsityPattern pattern = SparsityPattern::BlockAngular;
  double sparsity = 0.2;         // Uniform only
  double sigma_min = 0.5;
  double sigma_max = 2.0;
  std::size_t block_size = 1;
  std::uint64_t seed = 1;
};

namespace detail {

/// Bernoulli(p) support over [0, n) by geometric skipping; O(expected nnz).
inline std::vector<std::size_t> bernoulli_support(std::size_t n, double p, Xoshiro256& rng) {
  std::vector<std::size_t> out;
  if (p >= 1.0) {
    for (std::size_t c = 0; c < n; ++c) out.push_back(c);
    return out;
  }
  const double log_q = std::log1p(-p);
  double pos = -1.0;
  for (;;) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    pos += 1.0 + std::floor(std::log(u) / log_q);
    if (pos >= static_cast<double>(n)) break;
    out.push_back(static_cast<std::size_t>(pos));
  }
  return out;
}

/// Random sparse pattern (rows x cols), each entry kept with probability p. An empty
/// row gets one uniformly placed entry; an empty column gets one in a uniform row.
inline CoordinateMatrix random_sparse(std::size_t rows, std::size_t cols, double p, Xoshiro256& rng) {
  CoordinateMatrix a;
  a.rows = rows;
  a.cols = cols;
  std::vector<char> col_hit(cols, 0);
  std::vector<std::vector<std::size_t>> row_support(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto support = bernoulli_support(cols, p, rng);
    if (support.empty()) support.push_back(rng.bounded(cols));
    for (std::size_t c : support) col_hit[c] = 1;
    row_support[r] = std::move(support);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_hit[c]) continue;
    auto& support = row_support[rng.bounded(rows)];
    support.insert(std::upper_bound(support.begin(), support.end(), c), c);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c : row_support[r]) a.entries.push_back({r, c, rng.normal()});
  }
  return a;
}

inline std::vector<double> multiply(const CoordinateMatrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.rows, 0.0);
  for (const auto& e : a.entries) y[e.row] += e.value * x[e.col];
  return y;
}

}  // namespace detail

/// Random constrained lasso instance with planted sparse solution:
/// b = A x_plant + noise. BlockAngular ignores `m` and uses n + ceil(n / group_size) rows.
inline ProblemData generate_lasso(const LassoOptions& o) {
  if (o.n == 0 || o.m == 0) throw InputError("lasso dimensions must be >= 1");
  if (!(o.sparsity > 0.0 && o.sparsity <= 1.0)) throw InputError("sparsity must lie in (0, 1]");
  if (o.pattern == SparsityPattern::Uniform && static_cast<double>(o.n) * o.sparsity < 1.0) {
    throw InputError("infeasible sparsity: n * sparsity < 1 leaves rows empty on average");
  }
  if (o.box && o.box->lower > o.box->upper) throw InputError("box lower bound exceeds upper bound");
  Xoshiro256 rng(o.seed);
  ProblemData d;
  d.kind = ProblemKind::Lasso;
  d.lambda = o.lambda;
  d.box = o.box;
  d.block_size = o.block_size;

  switch (o.pattern) {
    case SparsityPattern::Uniform: d.matrix = detail::random_sparse(o.m, o.n, o.sparsity, rng); break;
    case SparsityPattern::Diagonal:
      if (o.m != o.n) throw InputError("diagonal pattern needs m == n");
      d.matrix.rows = d.matrix.cols = o.n;
      for (std::size_t r = 0; r < o.n; ++r) {
        double v = rng.normal();
        while (v == 0.0) v = rng.normal();
        d.matrix.entries.push_back({r, r, v});
      }
      break;
    case SparsityPattern::BlockAngular: {
      if (o.group_size == 0) throw InputError("group size must be >= 1");
      const std::size_t groups = (o.n + o.group_size - 1) / o.group_size;
      d.matrix.rows = groups + o.n;
      d.matrix.cols = o.n;
      for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t c = g * o.group_size; c < std::min(o.n, (g + 1) * o.group_size); ++c) {
          d.matrix.entries.push_back({g, c, rng.normal()});
        }
      }
      for (std::size_t c = 0; c < o.n; ++c) d.matrix.entries.push_back({groups + c, c, rng.normal()});
      break;
    }
  }

  d.planted.assign(o.n, 0.0);
  for (auto& v : d.planted) {
    if (rng.uniform() < o.plant_density) v = 2.0 * rng.normal();
    if (o.box) v = std::clamp(v, o.box->lower, o.box->upper);
  }
  d.rhs = detail::multiply(d.matrix, d.planted);
  for (auto& v : d.rhs) v += o.noise * rng.normal();
  return d;
}

/// Sparse logistic regression: samples a_j ~ sparse Gaussian, labels from a
/// planted separator with probability `flip_probability` of being flipped.
inline ProblemData generate_logistic(const LogisticOptions& o) {
  if (o.n == 0 || o.samples == 0) throw InputError("logistic dimensions must be >= 1");
  if (!(o.sparsity > 0.0 && o.sparsity <= 1.0)) throw InputError("sparsity must lie in (0, 1]");
  if (static_cast<double>(o.n) * o.sparsity < 1.0) throw InputError("infeasible sparsity: n * sparsity < 1");
  Xoshiro256 rng(o.seed);
  ProblemData d;
  d.kind = ProblemKind::Logistic;
  d.lambda = o.lambda;
  d.block_size = o.block_size;
  d.matrix = detail::random_sparse(o.samples, o.n, o.sparsity, rng);
  d.planted.resize(o.n);
  for (auto& v : d.planted) v = rng.normal();
  const auto margin = detail::multiply(d.matrix, d.planted);
  d.rhs.resize(o.samples);
  for (std::size_t j = 0; j < o.samples; ++j) {
    double y = margin[j] >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < o.flip_probability) y = -y;
    d.rhs[j] = y;
  }
  return d;
}

/// Dual of a separable strongly convex QP with quadratic g_j. BlockAngular uses
/// the column-linked pattern: column 0 reads every row, column j > 0 reads row j
/// only (so m = n and omega_bar = 2, omega = n). b is chosen with strict slack
/// at a random primal point, so the primal is strictly feasible.
inline ProblemData generate_dual(const DualOptions& o) {
  if (o.n == 0 || o.m == 0) throw InputError("dual dimensions must be >= 1");
  if (!(o.sigma_min > 0.0) || o.sigma_max < o.sigma_min) throw InputError("need 0 < sigma_min <= sigma_max");
  Xoshiro256 rng(o.seed);
  ProblemData d;
  d.kind = ProblemKind::Dual;
  d.block_size = o.block_size;
  if (o.pattern == SparsityPattern::BlockAngular) {
    d.matrix.rows = d.matrix.cols = o.n;
    for (std::size_t r = 0; r < o.n; ++r) d.matrix.entries.push_back({r, 0, rng.normal()});
    for (std::size_t j = 1; j < o.n; ++j) d.matrix.entries.push_back({j, j, rng.normal()});
  } else if (o.pattern == SparsityPattern::Uniform) {
    if (!(o.sparsity > 0.0 && o.sparsity <= 1.0)) throw InputError("sparsity must lie in (0, 1]");
    // Columns are the components here, so transpose a row-complete pattern.
    auto t = detail::random_sparse(o.m, o.n, o.sparsity, rng);
    d.matrix.rows = o.n;
    d.matrix.cols = o.m;
    for (const auto& e : t.entries) d.matrix.entries.push_back({e.col, e.row, e.value});
  } else {
    d.matrix.rows = d.matrix.cols = o.n;
    for (std::size_t r = 0; r < o.n; ++r) d.matrix.entries.push_back({r, r, 1.0 + rng.uniform()});
  }
  const std::size_t m = d.matrix.cols;
  d.sigma.resize(m);
  d.center.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    d.sigma[j] = rng.uniform(o.sigma_min, o.sigma_max);
    d.center[j] = 2.0 * rng.normal();
  }
  std::vector<double> u0(m);
  for (auto& v : u0) v = rng.normal();
  d.rhs = detail::multiply(d.matrix, u0);
  for (auto& v : d.rhs) v += rng.uniform(0.1, 1.0);
  return d;
}

/// Two-block instance on which no classical error bound holds:
/// F(x) = (x1 - x2)^2 / 2 + x1 + x2 over x >= 0, with W = I. It is built as a
/// single dual component (A = (1, -1)^T, sigma = 1, c = 0, b̄ = (1, 1)). The
/// unique minimizer is x̄ = 0, and along x = (t, t), t >= 1, the ratio
/// |x - x̄| / |grad^+ F(x)| equals t.
inline CompositeProblem make_error_bound_counterexample() {
  auto partition = BlockPartition::scalar(2);
  const std::vector<MatrixEntry> a{{0, 0, 1.0}, {1, 0, -1.0}};
  const std::vector<SparseEntry> bbar{{0, 1.0}, {1, 1.0}};
  const std::vector<double> center{0.0};
  std::vector<SmoothComponent> smooth;
  smooth.push_back(make_quadratic_conjugate_dual(partition, a, 1, bbar, 1.0, center));
  std::vector<RegularizerSpec> regs(2, RegularizerSpec::nonneg());
  return CompositeProblem(std::move(partition), std::move(smooth), std::move(regs), WeightMatrix{{1.0, 1.0}});
}

}  // namespace prcd
