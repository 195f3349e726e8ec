#ifndef POLARCBO_DYNAMICS_HPP
#define POLARCBO_DYNAMICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "polarcbo/cluster.hpp"
#include "polarcbo/ensemble.hpp"
#include "polarcbo/kernel.hpp"
#include "polarcbo/means.hpp"
#include "polarcbo/objectives.hpp"
#include "polarcbo/rng.hpp"
#include "polarcbo/schedule.hpp"

namespace polarcbo {

enum class Method {
  StandardCBO,
  PolarizedCBO,
  ClusterCBO,
  StandardCBS,
  PolarizedCBS
};

enum class LambdaMode { Optimization, Sampling };

bool is_sampling_method(Method m);
std::string to_string(Method m);
Method method_from_string(const std::string& name);
std::string to_string(LambdaMode m);
LambdaMode lambda_mode_from_string(const std::string& name);

struct StepperConfig {
  Method method = Method::StandardCBO;
  double dt = 0.01;
  NoiseModel noise;                     // CBO-family methods
  LambdaMode lambda_mode = LambdaMode::Optimization;  // CBS-family methods
  BetaSchedule schedule;
  Kernel kernel;                        // polarized / cluster methods
  int j_c = 1;                          // ClusterCBO
  double alpha = 0.0;                   // ClusterCBO
  int cluster_inner_iterations = 1;     // ClusterCBO
  MeansOptions means_options;
};

struct Snapshot {
  double time = 0.0;
  Ensemble ensemble;
  Matrix means;  // J x d weighted means active at this time
  double beta = 0.0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  int thinning = 1;
  int steps_completed = 0;
  bool failed = false;  // aborted on a non-finite state

  const Snapshot& final_snapshot() const { return snapshots.back(); }
};

/// One Euler-Maruyama update of the consensus dynamics:
/// x_i <- x_i - dt (x_i - m_i) + sigma n_i, with
/// n_i = |x_i - m_i| xi (isotropic) or (x_i - m_i) .* xi (coordinate-wise),
/// xi ~ N(0, dt I) drawn from particle i's own substream.
Ensemble cbo_step(const Ensemble& ensemble, const Matrix& means, double dt,
                  const NoiseModel& noise, std::vector<RngStream>& streams);

/// One Euler-Maruyama update of the sampling dynamics:
/// x_i <- x_i - dt (x_i - m_i) + sqrt(2 / lambda) sqrt(C_i) xi.
/// Covariances must be symmetric PSD; an eigenvalue below -1e-8 is treated
/// as an upstream bug, smaller negatives are clamped to zero.
Ensemble cbs_step(const Ensemble& ensemble, const Matrix& means,
                  const std::vector<Matrix>& covs, double dt, double lambda,
                  std::vector<RngStream>& streams);

/// lambda = 1 (optimization) or 1 / (1 + beta) (sampling).
double lambda_for(LambdaMode mode, double beta);

/// Iterates: compute means per method, step, advance beta. Snapshots are
/// recorded every `snapshot_stride` steps plus the final state. A
/// non-finite state aborts the run and flags the partial trajectory.
Trajectory run(const StepperConfig& config, const Ensemble& start,
               const Objective& objective, int n_steps,
               std::uint64_t master_seed, int snapshot_stride = 1);

}  // namespace polarcbo

#endif
