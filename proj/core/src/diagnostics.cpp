#include "polarcbo/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "polarcbo/log.hpp"
#include "polarcbo/means.hpp"

namespace polarcbo {

namespace {

void require_spd(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(who) + ": matrix not square");
  }
  if (!m.isApprox(m.transpose(), 1e-12)) {
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(who) +
                                ": matrix not positive definite");
  }
}

void check_target(const GaussianTarget& target) {
  require_spd(target.covariance, "GaussianTarget covariance");
  require_spd(target.kernel_covariance, "GaussianTarget kernel covariance");
  if (target.mean.size() != target.covariance.rows() ||
      target.mean.size() != target.kernel_covariance.rows()) {
    throw std::invalid_argument("GaussianTarget: dimension mismatch");
  }
}

Vector fd_hessian_column(const Objective& objective, const Vector& p, int n,
                         double h) {
  Vector pp = p, pm = p;
  pp[n] += h;
  pm[n] -= h;
  return (fd_gradient(objective.eval, pp) - fd_gradient(objective.eval, pm)) /
         (2.0 * h);
}

// Residual of the proximal optimality condition F(p) = p - x + kappa^2 grad V(p).
Vector proximal_residual(const Objective& objective, double kappa2,
                         const Vector& x, const Vector& p) {
  if (objective.quadratic) {
    const QuadraticForm& q = *objective.quadratic;
    return p - x + kappa2 * (q.precision * (p - q.center));
  }
  return p - x + kappa2 * fd_gradient(objective.eval, p);
}

}  // namespace

Vector proximal(const Objective& objective, double kappa, const Vector& x,
                double tol, int max_iterations) {
  if (!(kappa > 0.0)) throw std::invalid_argument("proximal: kappa <= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("proximal: tol <= 0");
  if (x.size() != objective.dim) {
    throw std::invalid_argument("proximal: dimension mismatch");
  }
  const double kappa2 = kappa * kappa;
  const int d = objective.dim;

  if (objective.quadratic) {
    // 0 = p - x + kappa^2 A (p - m)  =>  (I + kappa^2 A) p = x + kappa^2 A m
    const QuadraticForm& q = *objective.quadratic;
    const Matrix lhs = Matrix::Identity(d, d) + kappa2 * q.precision;
    return lhs.ldlt().solve(x + kappa2 * (q.precision * q.center));
  }

  Vector p = x;  // exact for kappa -> 0; a sane start elsewhere
  Vector residual = proximal_residual(objective, kappa2, x, p);
  double res_norm = residual.norm();
  for (int it = 0; it < max_iterations && res_norm > tol; ++it) {
    Matrix jac = Matrix::Identity(d, d);
    const double h = 1e-5 * (1.0 + p.norm());
    for (int n = 0; n < d; ++n) {
      jac.col(n) += kappa2 * fd_hessian_column(objective, p, n, h);
    }
    jac = 0.5 * (jac + jac.transpose());
    Vector step = jac.ldlt().solve(residual);
    if (!step.allFinite()) step = residual;  // fall back to fixed-point step

    // Backtracking damping on the residual norm.
    double scale = 1.0;
    Vector candidate;
    double candidate_norm = res_norm;
    for (int back = 0; back < 30; ++back) {
      candidate = p - scale * step;
      candidate_norm =
          proximal_residual(objective, kappa2, x, candidate).norm();
      if (candidate_norm < res_norm) break;
      scale *= 0.5;
    }
    if (!(candidate_norm < res_norm)) break;  // stalled
    p = candidate;
    residual = proximal_residual(objective, kappa2, x, p);
    res_norm = residual.norm();
  }
  if (res_norm > tol) {
    throw std::runtime_error("proximal: no convergence, last residual " +
                             std::to_string(res_norm));
  }
  return p;
}

double lyapunov(const Ensemble& ensemble, const Objective& objective,
                double kappa, double tol) {
  double sum = 0.0;
  for (int i = 0; i < ensemble.j_count(); ++i) {
    const Vector x = ensemble.positions.row(i).transpose();
    sum += (x - proximal(objective, kappa, x, tol)).squaredNorm();
  }
  return sum / (2.0 * ensemble.j_count());
}

double lyapunov_beta(const Ensemble& ensemble, const Kernel& kernel,
                     const Objective& objective, double beta) {
  const Matrix means = polarized_means(ensemble, kernel, objective, beta);
  return (ensemble.positions - means).squaredNorm() /
         (2.0 * ensemble.j_count());
}

DecayFit lyapunov_decay_rate(const Trajectory& trajectory,
                             const Objective& objective, double kappa) {
  std::vector<double> times, logs;
  for (const Snapshot& snap : trajectory.snapshots) {
    const double value = lyapunov(snap.ensemble, objective, kappa);
    if (value == 0.0) continue;  // log undefined, excluded from the fit
    times.push_back(snap.time);
    logs.push_back(std::log(value));
  }
  const int n = static_cast<int>(times.size());
  if (n < 3) {
    throw std::runtime_error(
        "lyapunov_decay_rate: fewer than 3 usable snapshots");
  }

  double t_mean = 0.0, l_mean = 0.0;
  for (int k = 0; k < n; ++k) {
    t_mean += times[k];
    l_mean += logs[k];
  }
  t_mean /= n;
  l_mean /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (int k = 0; k < n; ++k) {
    const double dt = times[k] - t_mean;
    const double dl = logs[k] - l_mean;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  if (stt == 0.0) {
    throw std::runtime_error("lyapunov_decay_rate: degenerate time axis");
  }
  DecayFit fit;
  fit.slope = stl / stt;
  fit.intercept = l_mean - fit.slope * t_mean;
  fit.points_used = n;
  fit.r_squared = sll > 0.0 ? (stl * stl) / (stt * sll) : 1.0;
  return fit;
}

Trajectory proximal_flow_run(const Objective& objective, double kappa,
                             const Ensemble& start, double dt, double sigma,
                             int n_steps, std::uint64_t master_seed,
                             int snapshot_stride, double tol) {
  if (!(dt > 0.0)) throw std::invalid_argument("proximal_flow_run: dt <= 0");
  if (n_steps < 0) throw std::invalid_argument("proximal_flow_run: n_steps < 0");
  if (snapshot_stride < 1) {
    throw std::invalid_argument("proximal_flow_run: stride < 1");
  }

  const int j_count = start.j_count();
  const int d = start.dim();
  std::vector<RngStream> streams;
  streams.reserve(j_count);
  for (int i = 0; i < j_count; ++i) {
    streams.emplace_back(master_seed, static_cast<std::uint64_t>(i));
  }

  auto proximal_points = [&](const Ensemble& ensemble) {
    Matrix p(j_count, d);
    for (int i = 0; i < j_count; ++i) {
      p.row(i) = proximal(objective, kappa,
                          ensemble.positions.row(i).transpose(), tol)
                     .transpose();
    }
    return p;
  };

  Trajectory traj;
  traj.thinning = snapshot_stride;
  Ensemble ensemble = start;
  NoiseModel noise(NoiseVariant::Isotropic, sigma);

  for (int t = 0; t < n_steps; ++t) {
    const Matrix targets = proximal_points(ensemble);
    if (t % snapshot_stride == 0) {
      traj.snapshots.push_back({t * dt, ensemble, targets, 0.0});
    }
    ensemble = cbo_step(ensemble, targets, dt, noise, streams);
    if (!ensemble.all_finite()) {
      warn("proximal_flow_run: non-finite ensemble after step " +
           std::to_string(t));
      traj.failed = true;
      return traj;
    }
    traj.steps_completed = t + 1;
  }
  traj.snapshots.push_back(
      {n_steps * dt, ensemble, proximal_points(ensemble), 0.0});
  return traj;
}

Matrix stationary_sigma3(const GaussianTarget& target, double beta) {
  check_target(target);
  if (!(beta > 0.0)) throw std::invalid_argument("stationary_sigma3: beta <= 0");
  const Matrix precision = target.kernel_covariance.inverse() +
                           (1.0 + beta) * target.covariance.inverse();
  return precision.inverse();
}

Vector stationary_mean_oracle(const GaussianTarget& target, double beta,
                              const Vector& x) {
  check_target(target);
  if (x.size() != target.mean.size()) {
    throw std::invalid_argument("stationary_mean_oracle: dimension mismatch");
  }
  const Matrix sigma3 = stationary_sigma3(target, beta);
  return sigma3 * (target.kernel_covariance.inverse() * x +
                   (1.0 + beta) * (target.covariance.inverse() * target.mean));
}

bool StationarityReport::all_means_within_band() const {
  for (const auto& q : queries) {
    if (!q.mean_within_band) return false;
  }
  return true;
}

double StationarityReport::max_cov_rel_error() const {
  double worst = 0.0;
  for (const auto& q : queries) {
    worst = std::max(worst, q.cov_rel_error);
  }
  return worst;
}

StationarityReport stationarity_check(const GaussianTarget& target,
                                      double beta, int n_samples,
                                      const Matrix& query_points,
                                      RngStream& rng) {
  check_target(target);
  if (!(beta > 0.0)) throw std::invalid_argument("stationarity_check: beta <= 0");
  if (n_samples < 1000) {
    throw std::invalid_argument("stationarity_check: need n_samples >= 1e3");
  }
  const int d = static_cast<int>(target.mean.size());
  if (query_points.cols() != d) {
    throw std::invalid_argument("stationarity_check: query dimension mismatch");
  }

  // Whitening map u = B^{-1} y with B = sqrt(Sigma_1) turns the kernel into
  // the isotropic Gaussian with kappa = 1, so the standard mean path applies
  // for any SPD Sigma_1.
  const Matrix b = psd_sqrt(target.kernel_covariance);
  const Matrix b_inv = b.inverse();

  // Samples from N(mean, Sigma_2), then their whitened image.
  const Matrix chol = Eigen::LLT<Matrix>(target.covariance).matrixL();
  Matrix samples(n_samples, d);
  for (int s = 0; s < n_samples; ++s) {
    samples.row(s) =
        (target.mean + chol * rng.normal_vector(d)).transpose();
  }
  const Ensemble whitened(samples * b_inv);  // b_inv is symmetric

  Matrix precision_white = b * target.covariance.inverse() * b;
  precision_white = 0.5 * (precision_white + precision_white.transpose());
  const Objective quad_white = quadratic(b_inv * target.mean, precision_white);
  const Kernel unit_kernel = Kernel::gaussian(1.0);
  const Matrix queries_white = query_points * b_inv;

  const Matrix means_white = polarized_means_at(whitened, unit_kernel,
                                                quad_white, beta,
                                                queries_white);
  const Matrix oracle_cov = stationary_sigma3(target, beta);
  const double oracle_cov_norm = oracle_cov.norm();
  const Vector gibbs = gibbs_log_weights(whitened, quad_white, beta);

  StationarityReport report;
  report.n_samples = n_samples;
  report.beta = beta;
  report.queries.reserve(query_points.rows());

  for (Eigen::Index q = 0; q < query_points.rows(); ++q) {
    StationarityQueryStat stat;
    stat.query = query_points.row(q).transpose();
    stat.oracle_mean = stationary_mean_oracle(target, beta, stat.query);
    stat.oracle_cov = oracle_cov;

    stat.empirical_mean = b * means_white.row(q).transpose();

    // Weights are invariant under the whitening bijection, so moment and
    // error statistics can be taken in the original coordinates.
    Vector logw(n_samples);
    for (int s = 0; s < n_samples; ++s) {
      logw[s] = kernel_log_eval_sq(
                    unit_kernel, (whitened.positions.row(s) -
                                  queries_white.row(q))
                                     .squaredNorm()) +
                gibbs[s];
    }
    const Vector w = softmax_weights(logw);
    const RowVector mean_row = stat.empirical_mean.transpose();
    stat.empirical_cov = weighted_row_cov(w, samples, mean_row);

    stat.standard_error = Vector::Zero(d);
    for (int s = 0; s < n_samples; ++s) {
      const RowVector centered = samples.row(s) - mean_row;
      for (int n = 0; n < d; ++n) {
        stat.standard_error[n] += w[s] * w[s] * centered[n] * centered[n];
      }
    }
    stat.standard_error = stat.standard_error.cwiseSqrt();

    stat.mean_within_band = true;
    for (int n = 0; n < d; ++n) {
      if (std::abs(stat.empirical_mean[n] - stat.oracle_mean[n]) >
          5.0 * stat.standard_error[n]) {
        stat.mean_within_band = false;
      }
    }
    stat.cov_rel_error =
        (stat.empirical_cov - oracle_cov).norm() / oracle_cov_norm;
    report.queries.push_back(std::move(stat));
  }
  return report;
}

}  // namespace polarcbo
