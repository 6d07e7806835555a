#pragma once

// Synthetic instances for the overlapping-group and multi-task graph experiments.
//
// Random source: std::mt19937_64 (sequence fixed by the C++ standard), uniforms from the top
// 53 bits, Gaussians by the Marsaglia polar method, bounded integers by rejection. None of the
// std::*_distribution classes are used, so a seed gives the same draws on every standard
// library. Matrices are filled row by row.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "spg/error.hpp"
#include "spg/losses.hpp"
#include "spg/multivariate.hpp"
#include "spg/penalty.hpp"

namespace spg {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Uniform on {0, ..., n-1}.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("Rng::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// k distinct values from {0..n-1}, in draw order (partial Fisher-Yates).
  std::vector<Index> sample_without_replacement(Index n, Index k) {
    if (k < 0 || k > n) throw ArgumentError("sample_without_replacement: k out of range");
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      const auto j = i + static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
  }

  Matrix gaussian_matrix(Index rows, Index cols, double sd = 1.0) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = sd * normal();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// overlapping groups

struct OverlapSimSpec {
  Index num_groups = 10;
  Index group_size = 100;
  Index overlap = 10;
  Index N = 1000;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
  double gamma = 2.0;
  double lambda = 2.0;

  Index features() const { return (group_size - overlap) * num_groups + overlap; }
};

struct OverlapInstance {
  Dataset data;
  GroupPenaltySpec penalty;
  Vector true_beta;
  double lambda = 0.0;
};

/// Groups {1..s}, {s-o+1 .. 2s-o}, ... (0-based here), each of size s with overlap o.
inline GroupPenaltySpec sliding_groups(Index num_groups, Index group_size, Index overlap, double gamma) {
  GroupPenaltySpec spec;
  spec.gamma = gamma;
  const Index stride = group_size - overlap;
  for (Index g = 0; g < num_groups; ++g) {
    std::vector<Index> members(static_cast<std::size_t>(group_size));
    std::iota(members.begin(), members.end(), g * stride);
    spec.groups.push_back(std::move(members));
  }
  return spec;
}

/// beta_j = (-1)^j exp(-(j-1)/100) for 1-based j.
inline Vector alternating_decay_beta(Index J) {
  Vector beta(J);
  for (Index i = 0; i < J; ++i) {
    const Index j = i + 1;
    beta[i] = (j % 2 == 0 ? 1.0 : -1.0) * std::exp(-static_cast<double>(j - 1) / 100.0);
  }
  return beta;
}

inline OverlapInstance gen_overlap_instance(const OverlapSimSpec& spec) {
  if (spec.num_groups < 1 || spec.group_size < 1 || spec.N < 1)
    throw ArgumentError("overlap simulation: num_groups, group_size and N must be positive");
  if (spec.overlap < 0 || spec.overlap >= spec.group_size)
    throw ArgumentError("overlap simulation: overlap must be in [0, group_size)");
  const Index J = spec.features();
  Rng rng(spec.seed);
  OverlapInstance inst;
  inst.penalty = sliding_groups(spec.num_groups, spec.group_size, spec.overlap, spec.gamma);
  inst.true_beta = alternating_decay_beta(J);
  inst.data.X = rng.gaussian_matrix(spec.N, J);
  inst.data.y = inst.data.X * inst.true_beta;
  for (Index i = 0; i < spec.N; ++i) inst.data.y[i] += spec.noise_sd * rng.normal();
  inst.lambda = spec.lambda;
  return inst;
}

// ---------------------------------------------------------------------------
// correlation graph over outputs

struct CorrelationGraph {
  GraphPenaltySpec graph;
  Matrix correlation;                ///< K x K; rows/cols of excluded columns are zero
  std::vector<Index> excluded;       ///< constant columns (correlation undefined)
};

/// Edges (m, l, r) for every pair of columns with |corr| >= rho; r is the signed correlation.
inline CorrelationGraph threshold_correlation_graph(const Matrix& Y, double rho, double gamma = 1.0) {
  if (Y.rows() < 2) throw ArgumentError("correlation graph needs at least 2 samples");
  const Index K = Y.cols();
  Matrix centered = Y.rowwise() - Y.colwise().mean();
  Vector norms = centered.colwise().norm().transpose();
  CorrelationGraph out;
  out.graph.num_nodes = K;
  out.graph.gamma = gamma;
  for (Index k = 0; k < K; ++k)
    if (!(norms[k] > 0.0)) out.excluded.push_back(k);
  for (Index k = 0; k < K; ++k)
    if (norms[k] > 0.0) centered.col(k) /= norms[k];
    else centered.col(k).setZero();
  out.correlation = centered.transpose() * centered;
  for (Index m = 0; m < K; ++m) {
    for (Index l = m; l < K; ++l) {
      double r = std::clamp(0.5 * (out.correlation(m, l) + out.correlation(l, m)), -1.0, 1.0);
      out.correlation(m, l) = out.correlation(l, m) = r;
    }
  }
  for (Index m = 0; m < K; ++m)
    for (Index l = m + 1; l < K; ++l) {
      const double r = out.correlation(m, l);
      if (norms[m] > 0.0 && norms[l] > 0.0 && std::abs(r) >= rho) out.graph.edges.push_back({m, l, r});
    }
  return out;
}

// ---------------------------------------------------------------------------
// multi-task instance with block-correlated outputs

struct GraphSimSpec {
  Index K = 10;
  Index J = 30;
  Index N = 100;
  std::vector<Index> block_sizes = {3, 3, 4};
  double within_fraction = 0.10;  ///< inputs relevant to all outputs of one block
  double cross2_fraction = 0.05;  ///< inputs relevant to two consecutive blocks
  double cross3_fraction = 0.01;  ///< inputs relevant to three consecutive blocks
  double signal = 0.8;            ///< b
  double rho = 0.3;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
  double gamma = 1.0;
  double lambda = 1.0;
};

struct GraphInstance {
  MultiProblem problem;
  Matrix true_B;
  CorrelationGraph correlation;
};

/// Number of inputs to pick for a fraction of J: round(f J), at least one when f > 0.
inline Index fraction_count(double fraction, Index J) {
  if (fraction <= 0.0) return 0;
  return std::clamp<Index>(static_cast<Index>(std::llround(fraction * static_cast<double>(J))), 1, J);
}

inline GraphInstance gen_graph_instance(const GraphSimSpec& spec) {
  if (spec.K < 1 || spec.J < 1 || spec.N < 2) throw ArgumentError("graph simulation: K, J >= 1 and N >= 2 required");
  if (!(spec.rho > 0.0)) throw ArgumentError("graph simulation: rho must be positive");
  for (double f : {spec.within_fraction, spec.cross2_fraction, spec.cross3_fraction})
    if (f < 0.0 || f > 1.0) throw ArgumentError("graph simulation: fractions must lie in [0, 1]");
  const Index total = std::accumulate(spec.block_sizes.begin(), spec.block_sizes.end(), Index{0});
  if (total != spec.K) throw ArgumentError("graph simulation: block sizes must sum to K");

  std::vector<Index> block_start;
  Index offset = 0;
  for (Index s : spec.block_sizes) {
    if (s < 1) throw ArgumentError("graph simulation: block sizes must be positive");
    block_start.push_back(offset);
    offset += s;
  }
  const auto nblocks = static_cast<Index>(spec.block_sizes.size());

  Rng rng(spec.seed);
  Matrix B = Matrix::Zero(spec.J, spec.K);
  auto plant = [&](Index first_block, Index span, double fraction) {
    if (first_block + span > nblocks) return;
    for (Index j : rng.sample_without_replacement(spec.J, fraction_count(fraction, spec.J)))
      for (Index b = first_block; b < first_block + span; ++b)
        for (Index k = 0; k < spec.block_sizes[static_cast<std::size_t>(b)]; ++k)
          B(j, block_start[static_cast<std::size_t>(b)] + k) = spec.signal;
  };
  for (Index b = 0; b < nblocks; ++b) plant(b, 1, spec.within_fraction);
  for (Index b = 0; b + 1 < nblocks; ++b) plant(b, 2, spec.cross2_fraction);
  for (Index b = 0; b + 2 < nblocks; ++b) plant(b, 3, spec.cross3_fraction);

  GraphInstance inst;
  inst.true_B = B;
  inst.problem.X = rng.gaussian_matrix(spec.N, spec.J);
  inst.problem.Y = inst.problem.X * B + rng.gaussian_matrix(spec.N, spec.K, spec.noise_sd);
  inst.correlation = threshold_correlation_graph(inst.problem.Y, spec.rho, spec.gamma);
  if (static_cast<Index>(inst.correlation.excluded.size()) == spec.K)
    throw ArgumentError("graph simulation: every output is constant, correlation matrix is degenerate");
  inst.problem.penalty = inst.correlation.graph;
  inst.problem.lambda = spec.lambda;
  return inst;
}

}  // namespace spg
