#pragma once

// Smooth convex losses g(beta): squared error and logistic.
//
// The solver evaluates losses through a linear "image" of the coefficients (G*beta with the
// Gram matrix G = X'X precomputed, X*beta otherwise). Images are linear in beta, so the
// FISTA extrapolation w = beta + c (beta - beta_prev) carries over to images and each
// iteration needs a single product with X or G.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "spg/error.hpp"
#include "spg/linalg.hpp"
#include "spg/penalty.hpp"

namespace spg {

struct Dataset {
  Matrix X;
  Vector y;

  Index samples() const { return X.rows(); }
  Index features() const { return X.cols(); }
};

struct LossEvaluation {
  double value = 0.0;
  Vector gradient;
};

struct LipschitzEstimate {
  double value = 0.0;
  bool exact = false;  ///< false: power iteration did not converge, value is ||X||_F^2 scaled
  int iterations = 0;
};

enum class LossKind { squared, logistic };

enum class GramMode {
  automatic,  ///< precompute X'X when J <= kGramMaxFeatures
  precompute,
  streaming,
};

inline constexpr Index kGramMaxFeatures = 4096;

inline bool use_gram(GramMode mode, Index J) {
  return mode == GramMode::precompute || (mode == GramMode::automatic && J <= kGramMaxFeatures);
}

inline void check_dataset(const Dataset& d) {
  if (d.X.rows() < 1 || d.X.cols() < 1) throw DimensionError("dataset: X must be non-empty");
  detail::require_dims(d.y.size() == d.X.rows(), "X has " + std::to_string(d.X.rows()) + " rows, y has length " +
                                                     std::to_string(d.y.size()));
  if (!d.X.allFinite() || !d.y.allFinite()) throw ArgumentError("dataset: non-finite entries");
}

inline void check_logistic_labels(const Vector& y) {
  for (Index i = 0; i < y.size(); ++i)
    if (y[i] != 1.0 && y[i] != -1.0)
      throw ArgumentError("logistic loss: label " + std::to_string(i + 1) + " is not in {-1, +1}");
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// 1 / (1 + exp(-z)) without overflow.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// direct evaluations

inline LossEvaluation squared_loss(const Dataset& data, const Vector& beta) {
  detail::require_dims(beta.size() == data.features(), "beta length vs X columns");
  detail::require_dims(data.y.size() == data.samples(), "y length vs X rows");
  const Vector residual = data.X * beta - data.y;
  return {0.5 * residual.squaredNorm(), data.X.transpose() * residual};
}

inline LossEvaluation logistic_loss(const Dataset& data, const Vector& beta) {
  detail::require_dims(beta.size() == data.features(), "beta length vs X columns");
  detail::require_dims(data.y.size() == data.samples(), "y length vs X rows");
  check_logistic_labels(data.y);
  const Vector margin = data.X * beta;
  Vector weight(margin.size());
  double value = 0.0;
  for (Index i = 0; i < margin.size(); ++i) {
    const double z = -data.y[i] * margin[i];
    value += softplus(z);
    weight[i] = -data.y[i] * sigmoid(z);
  }
  return {value, data.X.transpose() * weight};
}

/// lambda_max(X'X) by power iteration (tol 1e-6, at most 1000 iterations). On
/// non-convergence falls back to ||X||_F^2, which bounds lambda_max from above.
inline LipschitzEstimate design_lambda_max(const Matrix& X, bool precompute) {
  if (X.rows() < 1 || X.cols() < 1) throw DimensionError("lipschitz: empty design");
  PowerIterationResult r;
  if (precompute) {
    const Matrix gram = X.transpose() * X;
    r = power_iteration([&](const Vector& v, Vector& out) { out.noalias() = gram * v; }, gram.cols(), 1e-6, 1000);
  } else {
    Vector tmp(X.rows());
    r = power_iteration(
        [&](const Vector& v, Vector& out) {
          tmp.noalias() = X * v;
          out.noalias() = X.transpose() * tmp;
        },
        X.cols(), 1e-6, 1000);
  }
  if (!r.converged) return {X.squaredNorm(), false, r.iterations};
  return {r.value, true, r.iterations};
}

inline LipschitzEstimate squared_loss_lipschitz(const Dataset& data, bool precompute) {
  return design_lambda_max(data.X, precompute);
}

inline LipschitzEstimate logistic_loss_lipschitz(const Dataset& data) {
  auto est = design_lambda_max(data.X, use_gram(GramMode::automatic, data.features()));
  est.value /= 4.0;
  return est;
}

// ---------------------------------------------------------------------------
// solver-facing loss models

/// 0.5 ||Y - X B||_F^2 for a coefficient vector (Coef = Vector) or matrix (Coef = Matrix).
template <class Coef>
class SquaredLossModel {
 public:
  using coef_type = Coef;
  using image_type = Coef;  // G*B (Gram mode) or X*B (streaming mode)

  SquaredLossModel(const Matrix& X, const Coef& Y, GramMode mode) : X_(&X), Y_(&Y), gram_mode_(use_gram(mode, X.cols())) {
    if (gram_mode_) {
      gram_ = X.transpose() * X;
      xty_ = X.transpose() * Y;
      half_yty_ = 0.5 * Y.squaredNorm();
    }
  }

  bool gram_mode() const { return gram_mode_; }

  image_type image(const Coef& b) const {
    if (gram_mode_) return gram_ * b;
    return (*X_) * b;
  }

  double value(const Coef& b, const image_type& img) const {
    if (gram_mode_) return 0.5 * dot(b, img) - dot(b, xty_) + half_yty_;
    return 0.5 * (img - *Y_).squaredNorm();
  }

  /// grad = X'(X B - Y); written into `grad`.
  void gradient(const Coef& /*b*/, const image_type& img, Coef& grad) const {
    if (gram_mode_)
      grad = img - xty_;
    else
      grad.noalias() = X_->transpose() * (img - *Y_);
  }

  LipschitzEstimate lipschitz() const {
    if (!gram_mode_) return design_lambda_max(*X_, false);
    auto r = power_iteration([&](const Vector& v, Vector& out) { out.noalias() = gram_ * v; }, gram_.cols(), 1e-6, 1000);
    if (!r.converged) return {X_->squaredNorm(), false, r.iterations};
    return {r.value, true, r.iterations};
  }

 private:
  static double dot(const Coef& a, const Coef& b) { return a.cwiseProduct(b).sum(); }

  const Matrix* X_;
  const Coef* Y_;
  bool gram_mode_;
  Matrix gram_;
  Coef xty_;
  double half_yty_ = 0.0;
};

/// sum_i log(1 + exp(-y_i x_i' beta)), labels in {-1, +1}.
class LogisticLossModel {
 public:
  using coef_type = Vector;
  using image_type = Vector;  // X*beta

  LogisticLossModel(const Matrix& X, const Vector& y) : X_(&X), y_(&y) { check_logistic_labels(y); }

  image_type image(const Vector& b) const { return (*X_) * b; }

  double value(const Vector& /*b*/, const image_type& margin) const {
    double v = 0.0;
    for (Index i = 0; i < margin.size(); ++i) v += softplus(-(*y_)[i] * margin[i]);
    return v;
  }

  void gradient(const Vector& /*b*/, const image_type& margin, Vector& grad) const {
    Vector weight(margin.size());
    for (Index i = 0; i < margin.size(); ++i) weight[i] = -(*y_)[i] * sigmoid(-(*y_)[i] * margin[i]);
    grad.noalias() = X_->transpose() * weight;
  }

  LipschitzEstimate lipschitz() const {
    auto est = design_lambda_max(*X_, use_gram(GramMode::automatic, X_->cols()));
    est.value /= 4.0;
    return est;
  }

 private:
  const Matrix* X_;
  const Vector* y_;
};

}  // namespace spg
