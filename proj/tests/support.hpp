#pragma once

// Hand-rolled generators for property tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "spg/spg.hpp"

namespace gen {

using spg::Index;
using spg::Matrix;
using spg::Vector;

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  double normal() { return rng_.normal(); }
  Index integer(Index lo, Index hi) { return lo + static_cast<Index>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool coin() { return rng_.below(2) == 1; }

  Vector vector(Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }
  Matrix matrix(Index r, Index c) { return rng_.gaussian_matrix(r, c); }

  /// Vector with some exact zeros and some tied entries, to hit kinks.
  Vector structured_vector(Index n) {
    Vector v = vector(n, uniform(0.1, 3.0));
    for (Index i = 0; i < n; ++i) {
      const auto roll = rng_.below(6);
      if (roll == 0) v[i] = 0.0;
      if (roll == 1 && i > 0) v[i] = v[i - 1];
    }
    return v;
  }

  std::vector<Index> subset(Index n, Index k) { return rng_.sample_without_replacement(n, k); }

  /// Random overlapping groups covering a random subset of {0..J-1}.
  spg::GroupPenaltySpec group_spec(Index J, Index max_groups = 5) {
    spg::GroupPenaltySpec s;
    s.gamma = uniform(0.1, 3.0);
    const Index G = integer(1, max_groups);
    for (Index g = 0; g < G; ++g) {
      s.groups.push_back(subset(J, integer(1, J)));
      s.weights.push_back(uniform(0.2, 2.0));
    }
    if (coin()) s.weights.clear();
    return s;
  }

  /// Random graph over J nodes with signed correlations, some exactly zero or +-1.
  spg::GraphPenaltySpec graph_spec(Index J, Index max_edges = 8) {
    spg::GraphPenaltySpec s;
    s.num_nodes = J;
    s.gamma = uniform(0.1, 3.0);
    std::vector<std::pair<Index, Index>> pairs;
    for (Index m = 0; m < J; ++m)
      for (Index l = m + 1; l < J; ++l) pairs.push_back({m, l});
    const Index E = std::min<Index>(integer(1, max_edges), static_cast<Index>(pairs.size()));
    for (Index k : subset(static_cast<Index>(pairs.size()), E)) {
      double r = uniform(-1.0, 1.0);
      const auto roll = rng_.below(8);
      if (roll == 0) r = 1.0;
      if (roll == 1) r = -1.0;
      if (roll == 2) r = 0.0;
      s.edges.push_back({pairs[static_cast<std::size_t>(k)].first, pairs[static_cast<std::size_t>(k)].second, r});
    }
    return s;
  }

  spg::Rng& rng() { return rng_; }

 private:
  spg::Rng rng_;
};

inline std::vector<std::pair<Index, Index>> blocks_of(const spg::CouplingMatrix& C) {
  std::vector<std::pair<Index, Index>> out;
  for (const auto& b : C.row_blocks) out.push_back({b.offset, b.size});
  return out;
}

inline std::vector<std::pair<Index, Index>> unit_blocks(Index rows) {
  std::vector<std::pair<Index, Index>> out;
  for (Index r = 0; r < rows; ++r) out.push_back({r, 1});
  return out;
}

inline Vector labels(Source& src, const Matrix& X) {
  const Vector truth = src.vector(X.cols());
  Vector y(X.rows());
  for (Index i = 0; i < X.rows(); ++i) y[i] = (X.row(i).dot(truth) + 0.5 * src.normal()) >= 0 ? 1.0 : -1.0;
  return y;
}

}  // namespace gen
