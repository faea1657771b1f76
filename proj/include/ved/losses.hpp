#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "ved/errors.hpp"
#include "ved/model.hpp"

namespace ved {

/// Components of  total = 1/2 mse + beta * kld + lambda * cov  (training
/// conventions: mse and kld are batch means of per-sample sums).
struct LossBreakdown {
  double mse = 0.0;
  double kld = 0.0;
  double cov = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

inline double combine_loss(double mse, double kld, double cov, double beta, double lambda) {
  return 0.5 * mse + beta * kld + lambda * cov;
}

/// Batch mean of ||y_b - y_hat_b||^2 (columns are samples).
template <class T>
double mse_loss(const nn::Mat<T>& y, const nn::Mat<T>& y_hat) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols())
    throw DimensionError("mse_loss: shape mismatch");
  if (y.cols() == 0) throw DimensionError("mse_loss: empty batch");
  return (y - y_hat).template cast<double>().squaredNorm() / static_cast<double>(y.cols());
}

/// Reporting convention: additionally averaged over the m output features.
template <class T>
double mse_report(const nn::Mat<T>& y, const nn::Mat<T>& y_hat) {
  return mse_loss(y, y_hat) / static_cast<double>(y.rows());
}

/// Batch mean of KL(N(g, diag exp h) || N(0, I)) = 1/2 sum(exp h + g^2 - 1 - h).
template <class T>
double kld_loss(const nn::Mat<T>& g, const nn::Mat<T>& h) {
  if (g.rows() != h.rows() || g.cols() != h.cols()) throw DimensionError("kld_loss: shape mismatch");
  if (g.cols() == 0) throw DimensionError("kld_loss: empty batch");
  const Eigen::ArrayXXd gd = g.template cast<double>().array();
  const Eigen::ArrayXXd hd = h.template cast<double>().array();
  const double kl = 0.5 * (hd.exp() + gd.square() - 1.0 - hd).sum() / static_cast<double>(g.cols());
  if (!std::isfinite(kl)) throw NumericalError("kld_loss: non-finite value");
  return kl;
}

/// Reporting convention: additionally averaged over the r latent features.
template <class T>
double kld_report(const nn::Mat<T>& g, const nn::Mat<T>& h) {
  return kld_loss(g, h) / static_cast<double>(g.rows());
}

/// Covariance of the aggregate encoding distribution by the law of total
/// variance: diag(mean_b exp h_b) + Cov_b(g_b), divisor B.
template <class T>
nn::Mat<T> aggregate_cov(const nn::Mat<T>& g, const nn::Mat<T>& h) {
  if (g.rows() != h.rows() || g.cols() != h.cols()) throw DimensionError("aggregate_cov: shape mismatch");
  if (g.cols() < 2) throw StatisticsError("aggregate_cov needs a batch of at least 2");
  const T inv_b = T(1) / static_cast<T>(g.cols());
  const nn::Mat<T> centered = g.colwise() - g.rowwise().mean();
  nn::Mat<T> cov = (centered * centered.transpose()) * inv_b;
  cov.diagonal() += h.array().exp().rowwise().sum().matrix() * inv_b;
  return cov;
}

/// sum_{i != j} cov_ij^2 + sum_i (cov_ii - 1)^2 = ||cov - I||_F^2.
template <class T>
double cov_penalty(const nn::Mat<T>& cov) {
  if (cov.rows() != cov.cols()) throw DimensionError("cov_penalty: matrix must be square");
  nn::Mat<double> d = cov.template cast<double>();
  d.diagonal().array() -= 1.0;
  return d.squaredNorm();
}

/// Gradients of the total loss with respect to y_hat, g and h (the direct
/// KL/covariance terms only; the path through z is handled by the model).
template <class T>
struct LossGradients {
  nn::Mat<T> d_yhat;
  nn::Mat<T> d_g;
  nn::Mat<T> d_h;
};

template <class T>
LossBreakdown loss_from_forward(const nn::Mat<T>& y, const ForwardResult<T>& fwd, double beta,
                                double lambda, LossGradients<T>* grads = nullptr) {
  if (beta < 0.0 || lambda < 0.0) throw ConfigError("loss weights beta and lambda must be non-negative");
  const Eigen::Index batch = y.cols();
  LossBreakdown out;
  out.beta = beta;
  out.lambda = lambda;
  out.mse = mse_loss(y, fwd.y_hat);
  out.kld = kld_loss(fwd.g, fwd.h);
  nn::Mat<T> cov;
  if (batch >= 2) {
    cov = aggregate_cov(fwd.g, fwd.h);
    out.cov = cov_penalty(cov);
  } else if (lambda > 0.0) {
    throw StatisticsError("covariance penalty needs a batch of at least 2");
  }
  out.total = combine_loss(out.mse, out.kld, out.cov, beta, lambda);
  if (!std::isfinite(out.total)) throw NumericalError("total loss is not finite");

  if (grads) {
    const T inv_b = T(1) / static_cast<T>(batch);
    const T b = static_cast<T>(beta);
    const T l = static_cast<T>(lambda);
    // d(1/2 mse)/d y_hat
    grads->d_yhat = (fwd.y_hat - y) * inv_b;
    // d(beta kld)/dg, /dh
    grads->d_g = fwd.g * (b * inv_b);
    grads->d_h = (fwd.h.array().exp() - T(1)).matrix() * (T(0.5) * b * inv_b);
    if (lambda > 0.0) {
      // d||S - I||^2 / dS = 2 (S - I); through Cov(g) = Gc Gc^T / B this is
      // (4 / B) (S - I) Gc, through the diagonal 2 (S_ii - 1) exp(h_ib) / B.
      nn::Mat<T> resid = cov;
      resid.diagonal().array() -= T(1);
      const nn::Mat<T> centered = fwd.g.colwise() - fwd.g.rowwise().mean();
      grads->d_g.noalias() += (resid * centered) * (T(4) * l * inv_b);
      grads->d_h += (resid.diagonal().asDiagonal() * fwd.h.array().exp().matrix()) * (T(2) * l * inv_b);
    }
  }
  return out;
}

/// Forward pass plus loss with one eps draw per sample.
template <class T>
LossBreakdown total_loss(VedModel<T>& model, const nn::Mat<T>& images, const nn::Mat<T>& y,
                         double beta, double lambda, Rng& rng, Mode mode) {
  const ForwardResult<T> fwd = model.forward(images, rng, mode);
  return loss_from_forward(y, fwd, beta, lambda);
}

/// Train-mode forward, loss and backward with caller-supplied eps. Leaves
/// the parameter gradients in the model.
template <class T>
LossBreakdown loss_and_backward(VedModel<T>& model, const nn::Mat<T>& images, const nn::Mat<T>& y,
                                const nn::Mat<T>& eps, double beta, double lambda) {
  const ForwardResult<T> fwd = model.forward(images, eps, Mode::Train);
  LossGradients<T> grads;
  const LossBreakdown loss = loss_from_forward(y, fwd, beta, lambda, &grads);
  model.backward(grads.d_yhat, grads.d_g, grads.d_h);
  return loss;
}

}  // namespace ved
