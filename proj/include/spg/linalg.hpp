#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "spg/error.hpp"

namespace spg {

struct PowerIterationResult {
  double value = 0.0;     ///< largest eigenvalue (or singular value, see caller)
  int iterations = 0;
  bool converged = false; ///< false: value is the last Rayleigh quotient, treat as approximate
};

/// Deterministic start vector for power iteration.
///
/// All-ones is a poor start for difference operators (it lies in the null space of a graph
/// Laplacian), so a fixed-seed uniform draw on [0.5, 1.5) is used instead.
inline Eigen::VectorXd power_iteration_start(Eigen::Index n) {
  std::mt19937_64 engine(0x5eedULL);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = 0.5 + static_cast<double>(engine() >> 11) * 0x1.0p-53;
  return v / v.norm();
}

/// Largest eigenvalue of a symmetric positive semi-definite operator.
///
/// `apply(v, out)` writes op * v into out. Stops when the Rayleigh quotient changes by at most
/// tol relative to its current value.
template <class Apply>
PowerIterationResult power_iteration(Apply&& apply, Eigen::Index dim, double tol, int max_iter) {
  if (dim < 1) throw ArgumentError("power iteration on an empty operator");
  if (!(tol > 0.0) || max_iter < 1) throw ArgumentError("power iteration needs tol > 0 and max_iter >= 1");

  Eigen::VectorXd v = power_iteration_start(dim);
  Eigen::VectorXd w(dim);
  PowerIterationResult result;
  double previous = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    apply(v, w);
    const double rayleigh = v.dot(w);
    const double norm = w.norm();
    result.value = rayleigh;
    result.iterations = it;
    if (norm == 0.0) {
      // v is in the null space; for PSD operators reached from a generic start this only
      // happens for the zero operator.
      result.value = 0.0;
      result.converged = true;
      return result;
    }
    if (it > 1 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) {
      result.converged = true;
      return result;
    }
    previous = rayleigh;
    v = w / norm;
  }
  return result;
}

}  // namespace spg
