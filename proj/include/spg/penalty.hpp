#pragma once

// Structured-sparsity penalties and their sparse coupling matrices.
//
// Both penalty families share the dual form  Omega(beta) = max_{alpha in Q} alpha' C beta,
// where Q is a product of unit l2 balls (groups) or the unit l-infinity box (edges).
// Indices are 0-based in memory; file formats convert from 1-based.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "spg/error.hpp"

namespace spg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Overlapping group lasso: gamma * sum_g w_g ||beta_g||_2.
struct GroupPenaltySpec {
  std::vector<std::vector<Index>> groups;
  /// Per-group weights; empty means w_g = 1 for every group.
  std::vector<double> weights;
  double gamma = 1.0;

  double weight(std::size_t g) const { return weights.empty() ? 1.0 : weights[g]; }
  std::size_t num_groups() const { return groups.size(); }
};

struct Edge {
  Index m = 0;
  Index l = 0;
  double r = 0.0;  ///< edge correlation; weight tau(r) = |r|, fusion sign = sign(r)
};

/// Graph-guided fusion: gamma * sum_e tau(r_ml) |beta_m - sign(r_ml) beta_l|.
struct GraphPenaltySpec {
  Index num_nodes = 0;
  std::vector<Edge> edges;
  double gamma = 1.0;
};

/// Generic gamma * ||C beta||_1 with a user-supplied C. Smoothed like a graph penalty.
struct LinearPenaltySpec {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  double gamma = 1.0;
};

using PenaltySpec = std::variant<GroupPenaltySpec, GraphPenaltySpec, LinearPenaltySpec>;

struct RegularizationParams {
  double lambda = 0.0;
  double gamma = 0.0;
};

inline double edge_weight(double r) { return std::abs(r); }

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct RowBlock {
  Index offset = 0;
  Index size = 0;
};

/// Sparse C with Omega(beta) = max_{alpha in Q} alpha' C beta.
///
/// Group form: one row per (i, g) pair with i in g, in group order and ascending i within a
/// group; `row_blocks` partitions the rows by group. Graph form: one row per edge, in input
/// order; edges with r = 0 keep an all-zero row so alpha stays aligned with the edge list.
struct CouplingMatrix {
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  Storage matrix;
  std::vector<RowBlock> row_blocks;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }
  Index nnz() const { return matrix.nonZeros(); }
};

// ---------------------------------------------------------------------------
// validation

inline void validate(const GroupPenaltySpec& spec, Index J) {
  if (spec.gamma < 0.0 || !std::isfinite(spec.gamma))
    throw StructuralError("group penalty: gamma must be finite and non-negative");
  if (!spec.weights.empty() && spec.weights.size() != spec.groups.size())
    throw StructuralError("group penalty: " + std::to_string(spec.weights.size()) + " weights for " +
                          std::to_string(spec.groups.size()) + " groups");
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const auto& grp = spec.groups[g];
    if (grp.empty()) throw StructuralError("group penalty: group " + std::to_string(g + 1) + " is empty");
    std::set<Index> seen;
    for (Index i : grp) {
      if (i < 0 || i >= J)
        throw StructuralError("group penalty: index " + std::to_string(i + 1) + " in group " +
                              std::to_string(g + 1) + " outside 1.." + std::to_string(J));
      if (!seen.insert(i).second)
        throw StructuralError("group penalty: index " + std::to_string(i + 1) + " repeated in group " +
                              std::to_string(g + 1));
    }
    double w = spec.weight(g);
    if (!(w > 0.0) || !std::isfinite(w))
      throw StructuralError("group penalty: weight of group " + std::to_string(g + 1) + " must be positive");
  }
}

inline void validate(const GraphPenaltySpec& spec) {
  if (spec.gamma < 0.0 || !std::isfinite(spec.gamma))
    throw StructuralError("graph penalty: gamma must be finite and non-negative");
  if (spec.num_nodes < 1) throw StructuralError("graph penalty: num_nodes must be positive");
  std::set<std::pair<Index, Index>> seen;
  for (const auto& e : spec.edges) {
    if (e.m == e.l) throw StructuralError("graph penalty: self-loop on node " + std::to_string(e.m + 1));
    if (e.m < 0 || e.l >= spec.num_nodes || e.m > e.l)
      throw StructuralError("graph penalty: edge (" + std::to_string(e.m + 1) + "," + std::to_string(e.l + 1) +
                            ") must satisfy 1 <= m < l <= " + std::to_string(spec.num_nodes));
    if (!std::isfinite(e.r)) throw StructuralError("graph penalty: non-finite edge correlation");
    if (!seen.insert({e.m, e.l}).second)
      throw StructuralError("graph penalty: duplicate edge (" + std::to_string(e.m + 1) + "," +
                            std::to_string(e.l + 1) + ")");
  }
}

inline void validate(const LinearPenaltySpec& spec) {
  if (spec.gamma < 0.0 || !std::isfinite(spec.gamma))
    throw StructuralError("linear penalty: gamma must be finite and non-negative");
  if (spec.matrix.rows() < 1 || spec.matrix.cols() < 1) throw StructuralError("linear penalty: empty matrix");
}

// ---------------------------------------------------------------------------
// coupling matrices

inline CouplingMatrix build_group_coupling(const GroupPenaltySpec& spec, Index J) {
  validate(spec, J);
  std::vector<Eigen::Triplet<double>> triplets;
  CouplingMatrix C;
  Index row = 0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    std::vector<Index> members = spec.groups[g];
    std::sort(members.begin(), members.end());
    const double value = spec.gamma * spec.weight(g);
    C.row_blocks.push_back({row, static_cast<Index>(members.size())});
    for (Index i : members) triplets.emplace_back(row++, i, value);
  }
  C.matrix.resize(row, J);
  C.matrix.setFromTriplets(triplets.begin(), triplets.end());
  C.matrix.makeCompressed();
  return C;
}

inline CouplingMatrix build_graph_coupling(const GraphPenaltySpec& spec) {
  validate(spec);
  std::vector<Eigen::Triplet<double>> triplets;
  const auto E = static_cast<Index>(spec.edges.size());
  for (Index e = 0; e < E; ++e) {
    const auto& edge = spec.edges[static_cast<std::size_t>(e)];
    const double tau = edge_weight(edge.r);
    if (tau == 0.0) continue;
    triplets.emplace_back(e, edge.m, spec.gamma * tau);
    triplets.emplace_back(e, edge.l, -spec.gamma * sign_of(edge.r) * tau);
  }
  CouplingMatrix C;
  C.matrix.resize(E, spec.num_nodes);
  C.matrix.setFromTriplets(triplets.begin(), triplets.end());
  C.matrix.prune(0.0);
  C.matrix.makeCompressed();
  return C;
}

inline CouplingMatrix build_linear_coupling(const LinearPenaltySpec& spec) {
  validate(spec);
  CouplingMatrix C;
  C.matrix = spec.gamma * spec.matrix;
  C.matrix.makeCompressed();
  return C;
}

inline CouplingMatrix build_coupling(const PenaltySpec& spec, Index J) {
  return std::visit(
      [J](const auto& s) -> CouplingMatrix {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GroupPenaltySpec>) {
          return build_group_coupling(s, J);
        } else if constexpr (std::is_same_v<T, GraphPenaltySpec>) {
          if (s.num_nodes != J)
            throw DimensionError("graph penalty has " + std::to_string(s.num_nodes) + " nodes, expected " +
                                 std::to_string(J));
          return build_graph_coupling(s);
        } else {
          if (s.matrix.cols() != J)
            throw DimensionError("linear penalty has " + std::to_string(s.matrix.cols()) + " columns, expected " +
                                 std::to_string(J));
          return build_linear_coupling(s);
        }
      },
      spec);
}

inline Vector coupling_apply(const CouplingMatrix& C, const Vector& beta) {
  detail::require_dims(beta.size() == C.cols(), "coupling has " + std::to_string(C.cols()) +
                                                     " columns, beta has length " + std::to_string(beta.size()));
  return C.matrix * beta;
}

inline Vector coupling_apply_transpose(const CouplingMatrix& C, const Vector& alpha) {
  detail::require_dims(alpha.size() == C.rows(), "coupling has " + std::to_string(C.rows()) +
                                                      " rows, alpha has length " + std::to_string(alpha.size()));
  return C.matrix.transpose() * alpha;
}

// ---------------------------------------------------------------------------
// exact penalty values

inline double penalty_value_group(const GroupPenaltySpec& spec, const Vector& beta) {
  double total = 0.0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    double sq = 0.0;
    for (Index i : spec.groups[g]) {
      detail::require_dims(i >= 0 && i < beta.size(),
                           "group index " + std::to_string(i + 1) + " beyond beta length " + std::to_string(beta.size()));
      sq += beta[i] * beta[i];
    }
    total += spec.weight(g) * std::sqrt(sq);
  }
  return spec.gamma * total;
}

inline double penalty_value_graph(const GraphPenaltySpec& spec, const Vector& beta) {
  detail::require_dims(beta.size() == spec.num_nodes, "graph has " + std::to_string(spec.num_nodes) +
                                                          " nodes, beta has length " + std::to_string(beta.size()));
  double total = 0.0;
  for (const auto& e : spec.edges) total += edge_weight(e.r) * std::abs(beta[e.m] - sign_of(e.r) * beta[e.l]);
  return spec.gamma * total;
}

inline double penalty_value_linear(const LinearPenaltySpec& spec, const Vector& beta) {
  detail::require_dims(beta.size() == spec.matrix.cols(), "linear penalty column count");
  return spec.gamma * (spec.matrix * beta).lpNorm<1>();
}

inline double penalty_value(const PenaltySpec& spec, const Vector& beta) {
  return std::visit(
      [&beta](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GroupPenaltySpec>)
          return penalty_value_group(s, beta);
        else if constexpr (std::is_same_v<T, GraphPenaltySpec>)
          return penalty_value_graph(s, beta);
        else
          return penalty_value_linear(s, beta);
      },
      spec);
}

inline double penalty_gamma(const PenaltySpec& spec) {
  return std::visit([](const auto& s) { return s.gamma; }, spec);
}

inline PenaltySpec with_gamma(PenaltySpec spec, double gamma) {
  std::visit([gamma](auto& s) { s.gamma = gamma; }, spec);
  return spec;
}

}  // namespace spg
