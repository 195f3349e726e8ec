#include "polarcbo/numeric.hpp"

#include <stdexcept>

namespace polarcbo {

double log_sum_exp(const Vector& logw) {
  if (logw.size() == 0) throw std::invalid_argument("log_sum_exp: empty input");
  const double m = logw.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf/NaN)
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logw.size(); ++i) {
    sum += std::exp(logw[i] - m);
  }
  return m + std::log(sum);
}

Vector softmax_weights(const Vector& logw) {
  if (logw.size() == 0) {
    throw std::invalid_argument("softmax_weights: empty input");
  }
  const double m = logw.maxCoeff();
  Vector w = Vector::Zero(logw.size());
  if (m == neg_inf) return w;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logw.size(); ++i) {
    w[i] = std::exp(logw[i] - m);
    sum += w[i];
  }
  w /= sum;
  return w;
}

RowVector weighted_row_mean(const Vector& weights, const Matrix& points) {
  if (weights.size() != points.rows()) {
    throw std::invalid_argument("weighted_row_mean: size mismatch");
  }
  RowVector mean = RowVector::Zero(points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    mean += weights[i] * points.row(i);
  }
  return mean;
}

Matrix weighted_row_cov(const Vector& weights, const Matrix& points,
                        const RowVector& mean) {
  if (weights.size() != points.rows() || mean.size() != points.cols()) {
    throw std::invalid_argument("weighted_row_cov: size mismatch");
  }
  const Eigen::Index d = points.cols();
  Matrix cov = Matrix::Zero(d, d);
  RowVector centered(d);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    centered = points.row(i) - mean;
    cov += weights[i] * (centered.transpose() * centered);
  }
  return cov;
}

Matrix psd_sqrt(const Matrix& sym, double* min_eigenvalue) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("psd_sqrt: eigendecomposition failed");
  }
  Vector evals = es.eigenvalues();
  if (min_eigenvalue) *min_eigenvalue = evals.minCoeff();
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    evals[i] = evals[i] > 0.0 ? std::sqrt(evals[i]) : 0.0;
  }
  return es.eigenvectors() * evals.asDiagonal() *
         es.eigenvectors().transpose();
}

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double h0) {
  Vector grad(x.size());
  Vector xp = x, xm = x;
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    const double h = h0 * (1.0 + std::abs(x[n]));
    xp[n] = x[n] + h;
    xm[n] = x[n] - h;
    grad[n] = (f(xp) - f(xm)) / (2.0 * h);
    xp[n] = x[n];
    xm[n] = x[n];
  }
  return grad;
}

}  // namespace polarcbo
