#pragma once

// Nesterov smoothing of Omega(beta) = max_{alpha in Q} alpha' C beta:
//
//   f_mu(beta) = max_{alpha in Q} alpha' C beta - (mu/2) ||alpha||^2
//
// The maximizer alpha* has a closed form (projection onto Q), grad f_mu = C' alpha*, and the
// gradient is Lipschitz with constant ||C||^2 / mu. f_mu sits within mu*D below Omega, where
// D = max_{alpha in Q} ||alpha||^2 / 2.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "spg/error.hpp"
#include "spg/linalg.hpp"
#include "spg/penalty.hpp"

namespace spg {

enum class PenaltyKind {
  group,  ///< Q is a product of unit l2 balls, one per row block
  graph,  ///< Q is the unit l-infinity box (graph fusion and generic ||C beta||_1)
};

inline constexpr double kDefaultMu = 1e-4;
inline constexpr double kMuFloor = 1e-12;

struct SmoothingSpec {
  double mu = kDefaultMu;
  double D = 0.0;
  CouplingMatrix coupling;
  PenaltyKind kind = PenaltyKind::graph;
  /// ||C|| used in the Lipschitz constant (closed form, bound, or power iteration).
  double coupling_norm = 0.0;

  double lipschitz() const { return coupling_norm * coupling_norm / mu; }
};

// ---------------------------------------------------------------------------
// D and mu

inline double dual_domain_bound(const GroupPenaltySpec& spec) { return static_cast<double>(spec.groups.size()) / 2.0; }
inline double dual_domain_bound(const GraphPenaltySpec& spec) { return static_cast<double>(spec.edges.size()) / 2.0; }
// For an arbitrary C the box has one coordinate per row; same construction as for edges.
inline double dual_domain_bound(const LinearPenaltySpec& spec) { return static_cast<double>(spec.matrix.rows()) / 2.0; }
inline double dual_domain_bound(const PenaltySpec& spec) {
  return std::visit([](const auto& s) { return dual_domain_bound(s); }, spec);
}

/// mu = epsilon / (2D), floored at 1e-12.
inline double select_mu(double epsilon, double D) {
  if (!(epsilon > 0.0)) throw ArgumentError("select_mu: epsilon must be positive");
  if (!(D > 0.0)) throw ArgumentError("select_mu: D must be positive");
  return std::max(epsilon / (2.0 * D), kMuFloor);
}

// ---------------------------------------------------------------------------
// projections onto Q

/// Project each row block of u onto the unit l2 ball, in place.
inline void project_blocks(Eigen::Ref<Vector> u, const std::vector<RowBlock>& blocks) {
  for (const auto& b : blocks) {
    auto seg = u.segment(b.offset, b.size);
    const double n = seg.norm();
    if (n > 1.0) seg /= n;
  }
}

inline void clip_box(Eigen::Ref<Vector> u) { u = u.cwiseMax(-1.0).cwiseMin(1.0); }

inline void project_dual(Eigen::Ref<Vector> u, PenaltyKind kind, const std::vector<RowBlock>& blocks) {
  if (kind == PenaltyKind::group)
    project_blocks(u, blocks);
  else
    clip_box(u);
}

/// alpha*_g = S(gamma w_g beta_g / mu), blocks concatenated in group order (indices ascending).
inline Vector alpha_star_group(const GroupPenaltySpec& spec, double mu, const Vector& beta) {
  if (!(mu > 0.0)) throw ArgumentError("alpha_star_group: mu must be positive");
  Index total = 0;
  for (const auto& g : spec.groups) total += static_cast<Index>(g.size());
  Vector alpha(total);
  Index row = 0;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    std::vector<Index> members = spec.groups[g];
    std::sort(members.begin(), members.end());
    const double scale = spec.gamma * spec.weight(g) / mu;
    const Index start = row;
    for (Index i : members) {
      detail::require_dims(i >= 0 && i < beta.size(), "group index beyond beta length");
      alpha[row++] = scale * beta[i];
    }
    auto seg = alpha.segment(start, row - start);
    const double n = seg.norm();
    if (n > 1.0) seg /= n;
  }
  return alpha;
}

/// alpha* = clip(C beta / mu, -1, 1).
inline Vector alpha_star_graph(const GraphPenaltySpec& spec, double mu, const Vector& beta) {
  if (!(mu > 0.0)) throw ArgumentError("alpha_star_graph: mu must be positive");
  detail::require_dims(beta.size() == spec.num_nodes, "graph node count vs beta length");
  Vector alpha(static_cast<Index>(spec.edges.size()));
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const auto& edge = spec.edges[e];
    const double tau = edge_weight(edge.r);
    const double u = spec.gamma * tau * (beta[edge.m] - sign_of(edge.r) * beta[edge.l]) / mu;
    alpha[static_cast<Index>(e)] = std::clamp(u, -1.0, 1.0);
  }
  return alpha;
}

// ---------------------------------------------------------------------------
// smoothed value and gradient

inline Vector alpha_star(const SmoothingSpec& s, const Vector& beta) {
  Vector u = coupling_apply(s.coupling, beta) / s.mu;
  project_dual(u, s.kind, s.coupling.row_blocks);
  return u;
}

/// f_mu from the image C*beta; alpha is filled with the maximizer.
inline double smooth_value_from_image(const SmoothingSpec& s, const Vector& c_beta, Vector& alpha) {
  alpha = c_beta / s.mu;
  project_dual(alpha, s.kind, s.coupling.row_blocks);
  return alpha.dot(c_beta) - 0.5 * s.mu * alpha.squaredNorm();
}

inline double smooth_penalty_value(const SmoothingSpec& s, const Vector& beta) {
  Vector alpha;
  return smooth_value_from_image(s, coupling_apply(s.coupling, beta), alpha);
}

inline Vector smooth_penalty_gradient(const SmoothingSpec& s, const Vector& beta) {
  return coupling_apply_transpose(s.coupling, alpha_star(s, beta));
}

/// Exact penalty Omega(beta) = f_0(beta) evaluated through C.
inline double exact_value_from_image(const SmoothingSpec& s, const Vector& c_beta) {
  if (s.kind == PenaltyKind::graph) return c_beta.lpNorm<1>();
  double total = 0.0;
  for (const auto& b : s.coupling.row_blocks) total += c_beta.segment(b.offset, b.size).norm();
  return total;
}

// ---------------------------------------------------------------------------
// ||C||

/// ||C|| = gamma * max_j sqrt(sum_{g : j in g} w_g^2).
inline double coupling_norm_group(const GroupPenaltySpec& spec) {
  Index J = 0;
  for (const auto& g : spec.groups)
    for (Index i : g) J = std::max(J, i + 1);
  std::vector<double> sq(static_cast<std::size_t>(J), 0.0);
  for (std::size_t g = 0; g < spec.groups.size(); ++g)
    for (Index i : spec.groups[g]) sq[static_cast<std::size_t>(i)] += spec.weight(g) * spec.weight(g);
  const double m = sq.empty() ? 0.0 : *std::max_element(sq.begin(), sq.end());
  return spec.gamma * std::sqrt(m);
}

/// Upper bound ||C|| <= sqrt(2 gamma^2 max_j d_j), d_j = sum of tau(r_e)^2 over edges at j.
inline double coupling_norm_graph_bound(const GraphPenaltySpec& spec) {
  std::vector<double> degree(static_cast<std::size_t>(std::max<Index>(spec.num_nodes, 0)), 0.0);
  for (const auto& e : spec.edges) {
    const double t2 = edge_weight(e.r) * edge_weight(e.r);
    degree[static_cast<std::size_t>(e.m)] += t2;
    degree[static_cast<std::size_t>(e.l)] += t2;
  }
  const double m = degree.empty() ? 0.0 : *std::max_element(degree.begin(), degree.end());
  return std::sqrt(2.0 * spec.gamma * spec.gamma * m);
}

/// Largest singular value of C by power iteration on C'C.
inline PowerIterationResult spectral_norm_power_iteration(const CouplingMatrix& C, double tol = 1e-8,
                                                          int max_iter = 5000) {
  if (C.rows() < 1 || C.cols() < 1) throw ArgumentError("spectral norm of an empty coupling matrix");
  Vector tmp(C.rows());
  auto result = power_iteration(
      [&](const Vector& v, Vector& out) {
        tmp.noalias() = C.matrix * v;
        out.noalias() = C.matrix.transpose() * tmp;
      },
      C.cols(), tol, max_iter);
  result.value = std::sqrt(std::max(result.value, 0.0));
  return result;
}

// ---------------------------------------------------------------------------
// construction

struct SmoothingOptions {
  /// Use power iteration for ||C|| of graph penalties instead of the closed-form bound.
  bool exact_graph_norm = false;
};

inline SmoothingSpec make_smoothing(const PenaltySpec& penalty, Index J, double mu, SmoothingOptions opts = {}) {
  if (!(mu > 0.0)) throw ArgumentError("smoothing parameter mu must be positive");
  SmoothingSpec s;
  s.mu = std::max(mu, kMuFloor);
  s.coupling = build_coupling(penalty, J);
  s.D = dual_domain_bound(penalty);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GroupPenaltySpec>) {
          s.kind = PenaltyKind::group;
          s.coupling_norm = coupling_norm_group(p);
        } else if constexpr (std::is_same_v<T, GraphPenaltySpec>) {
          s.kind = PenaltyKind::graph;
          s.coupling_norm = opts.exact_graph_norm && s.coupling.rows() > 0
                                ? spectral_norm_power_iteration(s.coupling).value
                                : coupling_norm_graph_bound(p);
        } else {
          s.kind = PenaltyKind::graph;
          s.coupling_norm = spectral_norm_power_iteration(s.coupling).value;
        }
      },
      penalty);
  return s;
}

}  // namespace spg
