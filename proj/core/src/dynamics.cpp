#include "polarcbo/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "polarcbo/log.hpp"

namespace polarcbo {

bool is_sampling_method(Method m) {
  return m == Method::StandardCBS || m == Method::PolarizedCBS;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::StandardCBO: return "standard-cbo";
    case Method::PolarizedCBO: return "polarized-cbo";
    case Method::ClusterCBO: return "cluster-cbo";
    case Method::StandardCBS: return "standard-cbs";
    case Method::PolarizedCBS: return "polarized-cbs";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "standard-cbo" || name == "cbo") return Method::StandardCBO;
  if (name == "polarized-cbo") return Method::PolarizedCBO;
  if (name == "cluster-cbo") return Method::ClusterCBO;
  if (name == "standard-cbs" || name == "cbs") return Method::StandardCBS;
  if (name == "polarized-cbs") return Method::PolarizedCBS;
  throw std::invalid_argument("unknown method: " + name);
}

std::string to_string(LambdaMode m) {
  return m == LambdaMode::Optimization ? "optimization" : "sampling";
}

LambdaMode lambda_mode_from_string(const std::string& name) {
  if (name == "optimization" || name == "opt") return LambdaMode::Optimization;
  if (name == "sampling") return LambdaMode::Sampling;
  throw std::invalid_argument("unknown lambda mode: " + name);
}

Ensemble cbo_step(const Ensemble& ensemble, const Matrix& means, double dt,
                  const NoiseModel& noise, std::vector<RngStream>& streams) {
  const int j_count = ensemble.j_count();
  const int d = ensemble.dim();
  if (!(dt > 0.0)) throw std::invalid_argument("cbo_step: dt <= 0");
  if (means.rows() != j_count || means.cols() != d) {
    throw std::invalid_argument("cbo_step: means shape mismatch");
  }
  if (!means.allFinite()) {
    throw std::runtime_error("cbo_step: non-finite means, aborting step");
  }
  if (static_cast<int>(streams.size()) != j_count) {
    throw std::invalid_argument("cbo_step: one RNG stream per particle");
  }

  Matrix next(j_count, d);
  for (int i = 0; i < j_count; ++i) {
    const RowVector drift = ensemble.positions.row(i) - means.row(i);
    RowVector update = ensemble.positions.row(i) - dt * drift;
    if (noise.sigma > 0.0) {
      const Vector xi = gaussian_increment(streams[i], dt, d);
      if (noise.variant == NoiseVariant::Isotropic) {
        update += noise.sigma * drift.norm() * xi.transpose();
      } else {
        update += noise.sigma * drift.cwiseProduct(xi.transpose());
      }
    }
    next.row(i) = update;
  }
  return Ensemble(std::move(next));
}

Ensemble cbs_step(const Ensemble& ensemble, const Matrix& means,
                  const std::vector<Matrix>& covs, double dt, double lambda,
                  std::vector<RngStream>& streams) {
  const int j_count = ensemble.j_count();
  const int d = ensemble.dim();
  if (!(dt > 0.0)) throw std::invalid_argument("cbs_step: dt <= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("cbs_step: lambda <= 0");
  if (means.rows() != j_count || means.cols() != d) {
    throw std::invalid_argument("cbs_step: means shape mismatch");
  }
  if (!means.allFinite()) {
    throw std::runtime_error("cbs_step: non-finite means, aborting step");
  }
  if (covs.size() != static_cast<std::size_t>(j_count)) {
    throw std::invalid_argument("cbs_step: one covariance per particle");
  }
  if (static_cast<int>(streams.size()) != j_count) {
    throw std::invalid_argument("cbs_step: one RNG stream per particle");
  }

  const double amplitude = std::sqrt(2.0 / lambda);
  Matrix next(j_count, d);
  for (int i = 0; i < j_count; ++i) {
    double min_eig = 0.0;
    const Matrix root = psd_sqrt(covs[i], &min_eig);
    if (min_eig < -1e-8) {
      throw std::runtime_error(
          "cbs_step: covariance eigenvalue " + std::to_string(min_eig) +
          " below -1e-8 for particle " + std::to_string(i));
    }
    const RowVector drift = ensemble.positions.row(i) - means.row(i);
    const Vector xi = gaussian_increment(streams[i], dt, d);
    next.row(i) = ensemble.positions.row(i) - dt * drift +
                  amplitude * (root * xi).transpose();
  }
  return Ensemble(std::move(next));
}

double lambda_for(LambdaMode mode, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("lambda_for: beta <= 0");
  return mode == LambdaMode::Optimization ? 1.0 : 1.0 / (1.0 + beta);
}

namespace {

struct StepMeans {
  Matrix means;
  std::vector<Matrix> covs;  // CBS methods only
};

StepMeans compute_step_means(const StepperConfig& config,
                             const Ensemble& ensemble,
                             const Objective& objective, double beta,
                             ClusterState* cluster) {
  StepMeans out;
  switch (config.method) {
    case Method::StandardCBO: {
      const RowVector m = standard_mean(ensemble, objective, beta);
      out.means = m.replicate(ensemble.j_count(), 1);
      break;
    }
    case Method::PolarizedCBO:
      out.means = polarized_means(ensemble, config.kernel, objective, beta,
                                  config.means_options);
      break;
    case Method::ClusterCBO: {
      ClusterStepResult res =
          cluster_step(*cluster, ensemble, config.kernel, objective, beta,
                       config.cluster_inner_iterations);
      *cluster = std::move(res.state);
      out.means = std::move(res.means);
      break;
    }
    case Method::StandardCBS: {
      const RowVector m = standard_mean(ensemble, objective, beta);
      const Matrix c = standard_covariance(ensemble, objective, beta);
      out.means = m.replicate(ensemble.j_count(), 1);
      out.covs.assign(ensemble.j_count(), c);
      break;
    }
    case Method::PolarizedCBS: {
      MeansAndCovariances mc = polarized_means_and_covariances(
          ensemble, config.kernel, objective, beta, config.means_options);
      out.means = std::move(mc.means);
      out.covs = std::move(mc.covs);
      break;
    }
  }
  return out;
}

}  // namespace

Trajectory run(const StepperConfig& config, const Ensemble& start,
               const Objective& objective, int n_steps,
               std::uint64_t master_seed, int snapshot_stride) {
  if (n_steps < 0) throw std::invalid_argument("run: n_steps < 0");
  if (snapshot_stride < 1) throw std::invalid_argument("run: stride < 1");
  if (objective.dim != start.dim()) {
    throw std::invalid_argument("run: objective dimension mismatch");
  }

  const int j_count = start.j_count();
  std::vector<RngStream> streams;
  streams.reserve(j_count);
  for (int i = 0; i < j_count; ++i) {
    streams.emplace_back(master_seed, static_cast<std::uint64_t>(i));
  }

  ClusterState cluster;
  if (config.method == Method::ClusterCBO) {
    RngStream cluster_rng(master_seed, kClusterInitStream);
    cluster = init_cluster(start, objective, config.schedule.initial(),
                           config.j_c, config.alpha, cluster_rng);
  }

  Trajectory traj;
  traj.thinning = snapshot_stride;

  Ensemble ensemble = start;
  double beta = config.schedule.initial();

  for (int t = 0; t < n_steps; ++t) {
    StepMeans sm = compute_step_means(config, ensemble, objective, beta,
                                      &cluster);
    if (!sm.means.allFinite()) {
      warn("run: non-finite means at step " + std::to_string(t));
      traj.failed = true;
      return traj;
    }
    if (t % snapshot_stride == 0) {
      traj.snapshots.push_back({t * config.dt, ensemble, sm.means, beta});
    }
    if (is_sampling_method(config.method)) {
      const double lambda = lambda_for(config.lambda_mode, beta);
      ensemble = cbs_step(ensemble, sm.means, sm.covs, config.dt, lambda,
                          streams);
    } else {
      ensemble = cbo_step(ensemble, sm.means, config.dt, config.noise,
                          streams);
    }
    if (!ensemble.all_finite()) {
      warn("run: non-finite ensemble after step " + std::to_string(t));
      traj.failed = true;
      return traj;
    }
    beta = config.schedule.advance(beta);
    traj.steps_completed = t + 1;
  }

  StepMeans final_means =
      compute_step_means(config, ensemble, objective, beta, &cluster);
  traj.snapshots.push_back(
      {n_steps * config.dt, ensemble, final_means.means, beta});
  return traj;
}

}  // namespace polarcbo
