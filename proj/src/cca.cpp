#include "ved/cca.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ved/errors.hpp"

namespace ved {

double CCAResult::explained_fraction() const {
  if (cev.size() == 0 || output_variance <= 0.0) return 0.0;
  return cev(cev.size() - 1) / output_variance;
}

SampleCovariances sample_covariances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows())
    throw DimensionError("X has " + std::to_string(x.rows()) + " rows, Y has " + std::to_string(y.rows()));
  if (x.rows() <= 1) throw StatisticsError("sample covariances need N > 1");
  const double denom = static_cast<double>(x.rows() - 1);
  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd yc = y.rowwise() - y.colwise().mean();
  SampleCovariances s;
  s.xx = (xc.transpose() * xc) / denom;
  s.yy = (yc.transpose() * yc) / denom;
  s.xy = (xc.transpose() * yc) / denom;
  return s;
}

double default_ridge(const Eigen::MatrixXd& sxx) {
  return 1e-6 * sxx.trace() / static_cast<double>(sxx.rows());
}

CCAResult fit_cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::optional<double> eps) {
  const SampleCovariances s = sample_covariances(x, y);
  const Eigen::Index n = x.cols();
  const Eigen::Index m = y.cols();
  const Eigen::Index k = std::min(n, m);

  CCAResult res;
  res.ridge_eps = eps.value_or(default_ridge(s.xx));
  if (res.ridge_eps < 0.0) throw ConfigError("ridge eps must be non-negative");
  res.ridge_delta = 1e-10 * s.yy.trace() / static_cast<double>(m);
  res.output_variance = s.yy.trace();

  const Eigen::MatrixXd bx = s.xx + res.ridge_eps * Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> chol(bx);
  if (chol.info() != Eigen::Success)
    throw DecompositionError("S_XX + eps I is not positive definite (eps = " +
                             std::to_string(res.ridge_eps) + ")");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> syy(
      s.yy + res.ridge_delta * Eigen::MatrixXd::Identity(m, m));
  if (syy.info() != Eigen::Success) throw DecompositionError("S_YY eigendecomposition failed");
  if (!(syy.eigenvalues().minCoeff() > 0.0))
    throw DecompositionError("output covariance is singular even after ridge; condition "
                             "report: min eigenvalue " +
                             std::to_string(syy.eigenvalues().minCoeff()) + ", max " +
                             std::to_string(syy.eigenvalues().maxCoeff()));
  const Eigen::MatrixXd syy_inv_sqrt = syy.eigenvectors() *
                                       syy.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                       syy.eigenvectors().transpose();

  // With B = L L^T, the problem becomes the symmetric G G^T w = s^2 w where
  // G = L^-1 S_XY S_YY^-1/2, and a = L^-T w. Its eigenpairs are the left
  // singular pairs of G.
  const Eigen::MatrixXd g = chol.matrixL().solve(s.xy * syy_inv_sqrt);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU);
  res.s2 = svd.singularValues().head(k).array().square();
  Eigen::MatrixXd w = svd.matrixU().leftCols(k);
  res.A = chol.matrixU().solve(w);
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::Index arg = 0;
    res.A.col(i).cwiseAbs().maxCoeff(&arg);
    if (res.A(arg, i) < 0.0) res.A.col(i) *= -1.0;
  }
  res.C = s.xy.transpose() * res.A;

  res.cev.resize(k);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += res.C.col(i).squaredNorm();
    res.cev(i) = acc;
  }
  return res;
}

Eigen::VectorXd cev_curve(const CCAResult& res) {
  if (res.k() == 0) throw StatisticsError("empty CCA result");
  const double total = res.cev(res.k() - 1);
  if (!(total > 0.0)) throw StatisticsError("degenerate data: total explained variance is zero");
  Eigen::VectorXd curve = res.cev / total;
  curve(res.k() - 1) = 1.0;
  return curve;
}

int latent_dim_for_threshold(const CCAResult& res, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
  const Eigen::VectorXd curve = cev_curve(res);
  for (int i = 0; i < res.k(); ++i)
    if (curve(i) >= tau) return i + 1;
  return res.k();
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& m, Eigen::Index n_fit) {
  if (n_fit < 1 || n_fit > m.rows()) throw StatisticsError("invalid standardisation row count");
  const auto fit = m.topRows(n_fit);
  const Eigen::RowVectorXd mean = fit.colwise().mean();
  Eigen::RowVectorXd sd =
      ((fit.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n_fit)).sqrt();
  for (Eigen::Index j = 0; j < sd.size(); ++j)
    if (!(sd(j) > 1e-12)) sd(j) = 1.0;
  return ((m.rowwise() - mean).array().rowwise() / sd.array()).matrix();
}

}  // namespace ved
