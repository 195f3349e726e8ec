#ifndef POLARCBO_DIAGNOSTICS_HPP
#define POLARCBO_DIAGNOSTICS_HPP

#include <cstdint>
#include <vector>

#include "polarcbo/dynamics.hpp"
#include "polarcbo/ensemble.hpp"
#include "polarcbo/objectives.hpp"
#include "polarcbo/rng.hpp"

namespace polarcbo {

/// Gaussian target exp(-V) with V(y) = 1/2 (y - mean)^T covariance^{-1}
/// (y - mean), probed with a Gaussian kernel of covariance
/// kernel_covariance. Both matrices must be symmetric positive definite.
struct GaussianTarget {
  Vector mean;
  Matrix covariance;         // Sigma_2
  Matrix kernel_covariance;  // Sigma_1
};

/// p(x) = argmin_y |x - y|^2 / (2 kappa^2) + V(y), solved from the
/// optimality condition 0 = p - x + kappa^2 grad V(p). Quadratic
/// objectives use the linear system; everything else runs a damped Newton
/// iteration with finite-difference derivatives (the interface stays
/// zero-order). Throws on non-convergence, carrying the last residual.
Vector proximal(const Objective& objective, double kappa, const Vector& x,
                double tol = 1e-10, int max_iterations = 100);

/// L = 1/(2J) sum_i |x_i - p(x_i)|^2. Zero exactly when every particle
/// sits at a minimizer.
double lyapunov(const Ensemble& ensemble, const Objective& objective,
                double kappa, double tol = 1e-10);

/// Finite-beta variant using the kernel-weighted mean in place of the
/// proximal point: 1/(2J) sum_i |x_i - m_i|^2.
double lyapunov_beta(const Ensemble& ensemble, const Kernel& kernel,
                     const Objective& objective, double beta);

struct DecayFit {
  double slope = 0.0;      // fitted d(log L)/dt; negative means decay
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

/// Least-squares line through (t_k, log L_k) over the trajectory's
/// snapshots. Snapshots with L = 0 are excluded; fewer than 3 usable
/// points is an error.
DecayFit lyapunov_decay_rate(const Trajectory& trajectory,
                             const Objective& objective, double kappa);

/// Zero-temperature limiting dynamics x' = -(x - p(x)) with optional
/// isotropic multiplicative noise, discretized like the consensus stepper.
/// Snapshot means hold the proximal points (the drift targets).
Trajectory proximal_flow_run(const Objective& objective, double kappa,
                             const Ensemble& start, double dt, double sigma,
                             int n_steps, std::uint64_t master_seed,
                             int snapshot_stride = 1, double tol = 1e-10);

/// Sigma_3 = (Sigma_1^{-1} + (1 + beta) Sigma_2^{-1})^{-1}: the weighted
/// covariance the stationary Gaussian target produces at every point.
Matrix stationary_sigma3(const GaussianTarget& target, double beta);

/// m_x = Sigma_3 (Sigma_1^{-1} x + (1 + beta) Sigma_2^{-1} mean): the
/// weighted mean the stationary Gaussian target produces at x.
Vector stationary_mean_oracle(const GaussianTarget& target, double beta,
                              const Vector& x);

struct StationarityQueryStat {
  Vector query;
  Vector empirical_mean;
  Vector oracle_mean;
  Vector standard_error;   // per-coordinate, from the weighted sample
  Matrix empirical_cov;
  Matrix oracle_cov;
  double cov_rel_error = 0.0;  // Frobenius, relative to the oracle
  bool mean_within_band = false;  // |mean error| <= 5 SE per coordinate
};

struct StationarityReport {
  int n_samples = 0;
  double beta = 0.0;
  std::vector<StationarityQueryStat> queries;

  bool all_means_within_band() const;
  double max_cov_rel_error() const;
};

/// Draws n_samples from N(mean, Sigma_2) and measures the kernel-weighted
/// mean and covariance at each query row, comparing against the closed
/// forms above. Non-isotropic Sigma_1 is handled by whitening the
/// coordinates so the public isotropic-kernel mean path is exercised.
StationarityReport stationarity_check(const GaussianTarget& target,
                                      double beta, int n_samples,
                                      const Matrix& query_points,
                                      RngStream& rng);

}  // namespace polarcbo

#endif
