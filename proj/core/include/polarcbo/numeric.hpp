#ifndef POLARCBO_NUMERIC_HPP
#define POLARCBO_NUMERIC_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>

namespace polarcbo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

/// log(sum_i exp(logw_i)), shifted by the max entry. Returns -inf for an
/// all-(-inf) input.
double log_sum_exp(const Vector& logw);

/// Normalized weights exp(logw_i) / sum_j exp(logw_j) via max-shift.
/// If every entry is -inf the result is all zeros (caller must check).
Vector softmax_weights(const Vector& logw);

/// Weighted average of the rows of `points` under normalized weights.
/// All weighted-mean computations in the library funnel through here so
/// that algebraically equal weight vectors give bit-identical means.
RowVector weighted_row_mean(const Vector& weights, const Matrix& points);

/// Weighted covariance sum_i w_i (p_i - mean)^T (p_i - mean).
Matrix weighted_row_cov(const Vector& weights, const Matrix& points,
                        const RowVector& mean);

/// Symmetric PSD square root via eigendecomposition, eigenvalues clamped
/// at zero. `min_eigenvalue` receives the smallest raw eigenvalue so the
/// caller can decide whether a negative value is roundoff or a bug.
Matrix psd_sqrt(const Matrix& sym, double* min_eigenvalue = nullptr);

/// Central finite-difference gradient of f at x, step h_n = h0 * (1 + |x_n|).
Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double h0 = 1e-6);

}  // namespace polarcbo

#endif
