#pragma once

// Experiment configuration and its JSON form.
//
// Schema (every key optional; unknown keys are rejected):
//
//   {
//     "problem": {
//       "source": "generate-lasso" | "generate-logistic" | "generate-dual" | "load-matrix",
//       "m": 100, "n": 100,            // lasso rows/cols; dual: n constraints, m columns
//       "samples": 100,                // logistic sample count
//       "sparsity": 0.05,
//       "pattern": "uniform" | "diagonal" | "block_angular",
//       "group_size": 10,              // block_angular lasso
//       "lambda": 1.0,
//       "box": [lower, upper],
//       "block_size": 1,
//       "noise": 0.1,
//       "sigma": [min, max],           // dual sigma_j range
//       "seed": 1,                     // problem generation seed
//       "kind": "lasso" | "logistic" | "dual",   // load-matrix only
//       "matrix": "A.mtx", "rhs": "b.txt",       // load-matrix only
//       "sigma_file": "s.txt", "center_file": "c.txt"   // load-matrix dual only
//     },
//     "solver": {
//       "modes": ["prcd", "pcdm1", "full"],
//       "taus": [1, 10],
//       "seeds": [1, 2, 3],
//       "scheme": "tau-nice" | "partition",
//       "gap_tolerance": 1e-4,         // relative to the initial gap F(x0) - F*
//       "max_iters": 100000,
//       "log_stride": 0,               // 0: ceil(N / tau)
//       "reference_tolerance": 1e-10,
//       "reference_max_iters": 1000000
//     },
//     "output": { "dir": "out", "timing": true },
//     "workers": 1                     // cells run in parallel; env PRCD_WORKERS overrides
//   }

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "prcd/error.hpp"
#include "prcd/harness/problems.hpp"
#include "prcd/sampling.hpp"
#include "prcd/solver.hpp"

namespace prcd {

enum class ProblemSource { GenerateLasso, GenerateLogistic, GenerateDual, LoadMatrix };

inline ProblemSource parse_source(const std::string& s) {
  if (s == "generate-lasso") return ProblemSource::GenerateLasso;
  if (s == "generate-logistic") return ProblemSource::GenerateLogistic;
  if (s == "generate-dual") return ProblemSource::GenerateDual;
  if (s == "load-matrix") return ProblemSource::LoadMatrix;
  throw InputError("unknown problem source '" + s + "'");
}

inline const char* to_string(ProblemSource s) {
  switch (s) {
    case ProblemSource::GenerateLasso: return "generate-lasso";
    case ProblemSource::GenerateLogistic: return "generate-logistic";
    case ProblemSource::GenerateDual: return "generate-dual";
    case ProblemSource::LoadMatrix: return "load-matrix";
  }
  return "?";
}

inline SolverMode parse_mode(const std::string& s) {
  if (s == "prcd") return SolverMode::PRCD;
  if (s == "pcdm1") return SolverMode::PCDM1Ref;
  if (s == "full") return SolverMode::FullProxGrad;
  throw InputError("unknown solver mode '" + s + "' (expected prcd, pcdm1 or full)");
}

inline SamplingScheme parse_scheme(const std::string& s) {
  if (s == "tau-nice") return SamplingScheme::TauNiceUniform;
  if (s == "partition") return SamplingScheme::PartitionShuffle;
  throw InputError("unknown sampling scheme '" + s + "' (expected tau-nice or partition)");
}

inline const char* to_string(SamplingScheme s) {
  return s == SamplingScheme::TauNiceUniform ? "tau-nice" : "partition";
}

struct ProblemConfig {
  ProblemSource source = ProblemSource::GenerateLasso;
  std::size_t m = 100;
  std::size_t n = 100;
  std::size_t samples = 100;
  double sparsity = 0.05;
  SparsityPattern pattern = SparsityPattern::Uniform;
  std::size_t group_size = 10;
  double lambda = 1.0;
  std::optional<Box> box;
  std::size_t block_size = 1;
  double noise = 0.1;
  double sigma_min = 0.5;
  double sigma_max = 2.0;
  std::uint64_t seed = 1;
  ProblemKind kind = ProblemKind::Lasso;
  std::string matrix_path;
  std::string rhs_path;
  std::string sigma_path;
  std::string center_path;
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<SolverMode> modes{SolverMode::PRCD, SolverMode::PCDM1Ref};
  std::vector<std::size_t> taus{1};
  std::vector<std::uint64_t> seeds{1};
  SamplingScheme scheme = SamplingScheme::TauNiceUniform;
  double gap_tolerance = 1e-4;
  std::size_t max_iters = 100000;
  std::size_t log_stride = 0;
  double reference_tolerance = 1e-10;
  std::size_t reference_max_iters = 1000000;
  std::string output_dir = "out";
  bool timing = true;
  std::size_t workers = 1;

  void validate() const {
    const auto& p = problem;
    if (p.source != ProblemSource::LoadMatrix) {
      if (!(p.sparsity > 0.0 && p.sparsity <= 1.0)) throw InputError("sparsity must lie in (0, 1]");
      if (p.m < 1 || p.n < 1 || p.samples < 1) throw InputError("dimensions must be >= 1");
    } else if (p.matrix_path.empty() || p.rhs_path.empty()) {
      throw InputError("load-matrix needs both 'matrix' and 'rhs' paths");
    }
    if (p.block_size < 1) throw InputError("block size must be >= 1");
    if (p.lambda < 0.0) throw InputError("lambda must be >= 0");
    if (p.box && p.box->lower > p.box->upper) throw InputError("box lower bound exceeds upper bound");
    if (modes.empty()) throw InputError("no solver modes configured");
    if (seeds.empty()) throw InputError("no seeds configured");
    if (taus.empty()) throw InputError("no tau values configured");
    if (!(gap_tolerance > 0.0)) throw InputError("gap tolerance must be positive");
    if (!(reference_tolerance > 0.0)) throw InputError("reference tolerance must be positive");
    if (workers < 1) throw InputError("workers must be >= 1");
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw InputError("config section '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw InputError("unknown config key '" + where + "." + it.key() + "'");
  }
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

inline std::pair<double, double> read_pair(const nlohmann::json& j, const char* key) {
  std::vector<double> v;
  read_key(j, key, v);
  if (v.size() != 2) throw InputError(std::string("config key '") + key + "' must be a two-element array");
  return {v[0], v[1]};
}

}  // namespace detail

inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  detail::reject_unknown(j, {"problem", "solver", "output", "workers"}, "<root>");
  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    detail::reject_unknown(p,
                           {"source", "m", "n", "samples", "sparsity", "pattern", "group_size", "lambda", "box",
                            "block_size", "noise", "sigma", "seed", "kind", "matrix", "rhs", "sigma_file",
                            "center_file"},
                           "problem");
    auto& q = c.problem;
    std::string s;
    if (p.contains("source")) {
      detail::read_key(p, "source", s);
      q.source = parse_source(s);
    }
    if (p.contains("pattern")) {
      detail::read_key(p, "pattern", s);
      q.pattern = parse_pattern(s);
    }
    if (p.contains("kind")) {
      detail::read_key(p, "kind", s);
      q.kind = parse_problem_kind(s);
    }
    detail::read_key(p, "m", q.m);
    detail::read_key(p, "n", q.n);
    detail::read_key(p, "samples", q.samples);
    detail::read_key(p, "sparsity", q.sparsity);
    detail::read_key(p, "group_size", q.group_size);
    detail::read_key(p, "lambda", q.lambda);
    detail::read_key(p, "block_size", q.block_size);
    detail::read_key(p, "noise", q.noise);
    detail::read_key(p, "seed", q.seed);
    detail::read_key(p, "matrix", q.matrix_path);
    detail::read_key(p, "rhs", q.rhs_path);
    detail::read_key(p, "sigma_file", q.sigma_path);
    detail::read_key(p, "center_file", q.center_path);
    if (p.contains("box")) {
      if (p.at("box").is_null()) {
        q.box.reset();
      } else {
        const auto [lo, hi] = detail::read_pair(p, "box");
        q.box = Box{lo, hi};
      }
    }
    if (p.contains("sigma")) std::tie(q.sigma_min, q.sigma_max) = detail::read_pair(p, "sigma");
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    detail::reject_unknown(s,
                           {"modes", "taus", "seeds", "scheme", "gap_tolerance", "max_iters", "log_stride",
                            "reference_tolerance", "reference_max_iters"},
                           "solver");
    if (s.contains("modes")) {
      std::vector<std::string> names;
      detail::read_key(s, "modes", names);
      c.modes.clear();
      for (const auto& n : names) c.modes.push_back(parse_mode(n));
    }
    if (s.contains("scheme")) {
      std::string name;
      detail::read_key(s, "scheme", name);
      c.scheme = parse_scheme(name);
    }
    detail::read_key(s, "taus", c.taus);
    detail::read_key(s, "seeds", c.seeds);
    detail::read_key(s, "gap_tolerance", c.gap_tolerance);
    detail::read_key(s, "max_iters", c.max_iters);
    detail::read_key(s, "log_stride", c.log_stride);
    detail::read_key(s, "reference_tolerance", c.reference_tolerance);
    detail::read_key(s, "reference_max_iters", c.reference_max_iters);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown(o, {"dir", "timing"}, "output");
    detail::read_key(o, "dir", c.output_dir);
    detail::read_key(o, "timing", c.timing);
  }
  detail::read_key(j, "workers", c.workers);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  ExperimentConfig c;
  apply_json(c, j);
  return c;
}

/// Worker count from PRCD_WORKERS if set, otherwise `fallback`.
inline std::size_t workers_from_env(std::size_t fallback) {
  const char* v = std::getenv("PRCD_WORKERS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long long n = std::strtoll(v, &end, 10);
  if (*end != '\0' || n < 1) throw InputError(std::string("PRCD_WORKERS must be a positive integer, got '") + v + "'");
  return static_cast<std::size_t>(n);
}

/// Problem data described by the configuration (generated or loaded).
inline ProblemData make_problem_data(const ProblemConfig& p) {
  switch (p.source) {
    case ProblemSource::GenerateLasso: {
      LassoOptions o;
      o.m = p.m;
      o.n = p.n;
      o.sparsity = p.sparsity;
      o.lambda = p.lambda;
      o.box = p.box;
      o.block_size = p.block_size;
      o.pattern = p.pattern;
      o.group_size = p.group_size;
      o.noise = p.noise;
      o.seed = p.seed;
      return generate_lasso(o);
    }
    case ProblemSource::GenerateLogistic: {
      LogisticOptions o;
      o.samples = p.samples;
      o.n = p.n;
      o.sparsity = p.sparsity;
      o.lambda = p.lambda;
      o.block_size = p.block_size;
      o.seed = p.seed;
      return generate_logistic(o);
    }
    case ProblemSource::GenerateDual: {
      DualOptions o;
      o.n = p.n;
      o.m = p.m;
      o.pattern = p.pattern;
      o.sparsity = p.sparsity;
      o.sigma_min = p.sigma_min;
      o.sigma_max = p.sigma_max;
      o.block_size = p.block_size;
      o.seed = p.seed;
      return generate_dual(o);
    }
    case ProblemSource::LoadMatrix: {
      auto f = load_matrix(p.matrix_path, p.rhs_path);
      ProblemData d;
      d.kind = p.kind;
      d.matrix = std::move(f.matrix);
      d.rhs = std::move(f.rhs);
      d.lambda = p.lambda;
      d.box = p.box;
      d.block_size = p.block_size;
      if (p.kind == ProblemKind::Dual) {
        if (p.sigma_path.empty() || p.center_path.empty()) {
          throw InputError("load-matrix of a dual problem needs 'sigma_file' and 'center_file'");
        }
        d.sigma = load_vector_file(p.sigma_path);
        d.center = load_vector_file(p.center_path);
      }
      return d;
    }
  }
  throw InputError("unhandled problem source");
}

/// Writes the problem files under `prefix` and returns the problem section
/// that loads them back (source load-matrix).
inline nlohmann::json save_problem(const ProblemData& d, const std::string& prefix) {
  const std::string mtx = prefix + ".mtx", rhs = prefix + ".rhs";
  save_matrix_file(mtx, d.matrix);
  save_vector_file(rhs, d.rhs);
  nlohmann::json p;
  p["source"] = "load-matrix";
  p["kind"] = to_string(d.kind);
  p["matrix"] = mtx;
  p["rhs"] = rhs;
  p["lambda"] = d.lambda;
  p["block_size"] = d.block_size;
  if (d.box) p["box"] = {d.box->lower, d.box->upper};
  if (d.kind == ProblemKind::Dual) {
    p["sigma_file"] = prefix + ".sigma";
    p["center_file"] = prefix + ".center";
    save_vector_file(prefix + ".sigma", d.sigma);
    save_vector_file(prefix + ".center", d.center);
  }
  return p;
}

}  // namespace prcd
