#include <doctest.h>

#include <cmath>

#include "polarcbo/dynamics.hpp"
#include "polarcbo/log.hpp"

using namespace polarcbo;

namespace {

Objective norm_objective(int dim) {
  Objective obj;
  obj.name = "norm";
  obj.dim = dim;
  obj.eval = [](const Vector& x) { return x.squaredNorm(); };
  return obj;
}

Objective flat_objective(int dim) {
  Objective obj;
  obj.name = "flat";
  obj.dim = dim;
  obj.eval = [](const Vector&) { return 1.0; };
  return obj;
}

Ensemble random_ensemble(int j, int d, std::uint64_t seed) {
  RngStream rng(seed, kPositionInitStream);
  return init_uniform(j, d, -3.0, 3.0, rng);
}

std::vector<RngStream> particle_streams(std::uint64_t seed, int j) {
  std::vector<RngStream> streams;
  for (int i = 0; i < j; ++i) streams.emplace_back(seed, i);
  return streams;
}

bool matrices_identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

bool trajectories_identical(const Trajectory& a, const Trajectory& b) {
  if (a.snapshots.size() != b.snapshots.size()) return false;
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    if (!matrices_identical(a.snapshots[k].ensemble.positions,
                            b.snapshots[k].ensemble.positions) ||
        !matrices_identical(a.snapshots[k].means, b.snapshots[k].means)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("sigma = 0, dt = 1 contracts every particle onto its mean") {
  const Ensemble ensemble = random_ensemble(8, 2, 1);
  Matrix means(8, 2);
  for (int i = 0; i < 8; ++i) means.row(i) = RowVector::Constant(2, 0.25 * i);
  auto streams = particle_streams(1, 8);
  const Ensemble stepped = cbo_step(ensemble, means, 1.0,
                                    NoiseModel(NoiseVariant::Isotropic, 0.0),
                                    streams);
  // the update is x - (x - m), which lands on m up to one rounding
  CHECK((stepped.positions - means).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("particles already at their means are a fixed point") {
  const Ensemble ensemble = random_ensemble(6, 3, 2);
  const Matrix means = ensemble.positions;
  for (NoiseVariant variant :
       {NoiseVariant::Isotropic, NoiseVariant::Coordinatewise}) {
    auto streams = particle_streams(2, 6);
    const Ensemble stepped =
        cbo_step(ensemble, means, 0.05, NoiseModel(variant, 2.0), streams);
    CHECK(matrices_identical(stepped.positions, ensemble.positions));
  }
}

TEST_CASE("cbo update matches the hand-assembled formula") {
  const Ensemble ensemble = random_ensemble(5, 2, 3);
  Matrix means(5, 2);
  means.setConstant(0.3);
  const double dt = 0.01;
  const double sigma = 1.0;

  for (NoiseVariant variant :
       {NoiseVariant::Isotropic, NoiseVariant::Coordinatewise}) {
    auto streams = particle_streams(3, 5);
    const Ensemble stepped =
        cbo_step(ensemble, means, dt, NoiseModel(variant, sigma), streams);

    auto replay = particle_streams(3, 5);
    for (int i = 0; i < 5; ++i) {
      const RowVector drift = ensemble.positions.row(i) - means.row(i);
      const Vector xi = gaussian_increment(replay[i], dt, 2);
      RowVector expected = ensemble.positions.row(i) - dt * drift;
      if (variant == NoiseVariant::Isotropic) {
        expected += sigma * drift.norm() * xi.transpose();
      } else {
        expected += sigma * drift.cwiseProduct(xi.transpose());
      }
      CHECK((stepped.positions.row(i) - expected).cwiseAbs().maxCoeff() <=
            1e-15);
    }
  }
}

TEST_CASE("cbs step: zero covariance contracts, identity covariance adds "
          "sqrt(2/lambda) xi") {
  const Ensemble ensemble = random_ensemble(4, 2, 4);
  Matrix means(4, 2);
  means.setConstant(-0.5);
  const std::vector<Matrix> zero_covs(4, Matrix::Zero(2, 2));

  auto streams = particle_streams(4, 4);
  const Ensemble contracted =
      cbs_step(ensemble, means, zero_covs, 1.0, 1.0, streams);
  CHECK(matrices_identical(contracted.positions, means));

  const std::vector<Matrix> unit_covs(4, Matrix::Identity(2, 2));
  const double dt = 0.01;
  for (double lambda : {1.0, 0.5}) {  // 0.5 = sampling mode at beta = 1
    auto step_streams = particle_streams(4, 4);
    const Ensemble stepped =
        cbs_step(ensemble, means, unit_covs, dt, lambda, step_streams);
    auto replay = particle_streams(4, 4);
    for (int i = 0; i < 4; ++i) {
      const RowVector drift = ensemble.positions.row(i) - means.row(i);
      const Vector xi = gaussian_increment(replay[i], dt, 2);
      const RowVector expected = ensemble.positions.row(i) - dt * drift +
                                 std::sqrt(2.0 / lambda) * xi.transpose();
      CHECK((stepped.positions.row(i) - expected).cwiseAbs().maxCoeff() <=
            1e-14);
    }
  }
}

TEST_CASE("cbs step rejects a covariance with a clearly negative eigenvalue") {
  const Ensemble ensemble = random_ensemble(1, 2, 5);
  Matrix means(1, 2);
  means.setZero();
  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1e-6;
  auto streams = particle_streams(5, 1);
  CHECK_THROWS_AS(
      cbs_step(ensemble, means, {bad}, 0.01, 1.0, streams),
      std::runtime_error);

  // roundoff-scale negatives are clamped, not fatal
  Matrix rounding(2, 2);
  rounding << 1.0, 0.0, 0.0, -1e-12;
  auto streams2 = particle_streams(5, 1);
  CHECK_NOTHROW(cbs_step(ensemble, means, {rounding}, 0.01, 1.0, streams2));
}

TEST_CASE("lambda interpolates optimization and sampling") {
  CHECK(lambda_for(LambdaMode::Optimization, 0.5) == 1.0);
  CHECK(lambda_for(LambdaMode::Optimization, 1e6) == 1.0);
  CHECK(lambda_for(LambdaMode::Sampling, 1.0) == 0.5);
  double previous = 1.0;
  for (double beta : {1.0, 10.0, 100.0, 1e4, 1e8}) {
    const double lambda = lambda_for(LambdaMode::Sampling, beta);
    CHECK(lambda < previous);
    previous = lambda;
  }
  CHECK(lambda_for(LambdaMode::Sampling, 1e12) ==
        doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("mean shift: flat objective, dt = 1, sigma = 0") {
  const Ensemble ensemble = random_ensemble(12, 2, 6);
  const Objective flat = flat_objective(2);
  const Kernel kernel = Kernel::gaussian(0.8);

  StepperConfig config;
  config.method = Method::PolarizedCBO;
  config.kernel = kernel;
  config.dt = 1.0;
  config.noise = NoiseModel(NoiseVariant::Isotropic, 0.0);
  config.schedule = BetaSchedule::fixed(1.0);
  const Trajectory traj = run(config, ensemble, flat, 1, 6, 1);

  // classical mean-shift iteration, computed directly
  for (int i = 0; i < 12; ++i) {
    double total = 0.0;
    RowVector mean = RowVector::Zero(2);
    for (int j = 0; j < 12; ++j) {
      const double k = std::exp(
          kernel_log_eval(kernel, ensemble.positions.row(i).transpose(),
                          ensemble.positions.row(j).transpose()));
      total += k;
      mean += k * ensemble.positions.row(j);
    }
    mean /= total;
    CHECK((traj.final_snapshot().ensemble.positions.row(i) - mean)
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("n_steps = 0 leaves only the initial snapshot") {
  const Ensemble ensemble = random_ensemble(5, 2, 7);
  StepperConfig config;
  config.method = Method::StandardCBO;
  config.schedule = BetaSchedule::fixed(1.0);
  config.noise = NoiseModel(NoiseVariant::Isotropic, 1.0);
  const Trajectory traj = run(config, ensemble, norm_objective(2), 0, 7, 1);
  CHECK(traj.snapshots.size() == 1);
  CHECK(traj.snapshots[0].time == 0.0);
  CHECK(matrices_identical(traj.snapshots[0].ensemble.positions,
                           ensemble.positions));
}

TEST_CASE("reduction chain: constant-kernel polarized == standard, "
          "J_c = 1 cluster == standard, constant-kernel CBS == standard") {
  const Ensemble ensemble = random_ensemble(10, 2, 8);
  const Objective obj = norm_objective(2);

  StepperConfig standard;
  standard.method = Method::StandardCBO;
  standard.dt = 0.05;
  standard.noise = NoiseModel(NoiseVariant::Coordinatewise, 0.8);
  standard.schedule = BetaSchedule(2.0, 1.01, 50.0);
  const Trajectory base = run(standard, ensemble, obj, 40, 8, 1);

  StepperConfig polarized = standard;
  polarized.method = Method::PolarizedCBO;
  polarized.kernel = Kernel::constant();
  CHECK(trajectories_identical(base, run(polarized, ensemble, obj, 40, 8, 1)));

  StepperConfig clustered = standard;
  clustered.method = Method::ClusterCBO;
  clustered.j_c = 1;
  clustered.alpha = 5.0;
  clustered.kernel = Kernel::gaussian(0.5);
  CHECK(trajectories_identical(base, run(clustered, ensemble, obj, 40, 8, 1)));

  StepperConfig cbs;
  cbs.method = Method::StandardCBS;
  cbs.dt = 0.05;
  cbs.lambda_mode = LambdaMode::Sampling;
  cbs.schedule = BetaSchedule::fixed(1.0);
  const Trajectory cbs_base = run(cbs, ensemble, obj, 40, 8, 1);
  StepperConfig polarized_cbs = cbs;
  polarized_cbs.method = Method::PolarizedCBS;
  polarized_cbs.kernel = Kernel::constant();
  CHECK(trajectories_identical(cbs_base,
                               run(polarized_cbs, ensemble, obj, 40, 8, 1)));
}

TEST_CASE("sigma = 0 trajectories are seed-independent") {
  const Ensemble ensemble = random_ensemble(9, 2, 9);
  StepperConfig config;
  config.method = Method::PolarizedCBO;
  config.kernel = Kernel::gaussian(1.0);
  config.noise = NoiseModel(NoiseVariant::Isotropic, 0.0);
  config.schedule = BetaSchedule::fixed(2.0);
  const Trajectory a = run(config, ensemble, norm_objective(2), 30, 1, 1);
  const Trajectory b = run(config, ensemble, norm_objective(2), 30, 999, 1);
  CHECK(trajectories_identical(a, b));
}

TEST_CASE("same seed reproduces the trajectory bit for bit") {
  const Ensemble ensemble = random_ensemble(9, 2, 10);
  StepperConfig config;
  config.method = Method::PolarizedCBO;
  config.kernel = Kernel::gaussian(1.0);
  config.noise = NoiseModel(NoiseVariant::Isotropic, 1.0);
  config.schedule = BetaSchedule::fixed(2.0);
  const Trajectory a = run(config, ensemble, norm_objective(2), 30, 5, 1);
  const Trajectory b = run(config, ensemble, norm_objective(2), 30, 5, 1);
  CHECK(trajectories_identical(a, b));
}

TEST_CASE("deterministic flow converges with first order in dt") {
  // sigma = 0 standard CBO on a quadratic: Richardson ratio about 2
  const Objective obj = quadratic(Vector::Zero(1), Matrix::Identity(1, 1));
  Matrix pos(3, 1);
  pos << -2.0, 0.5, 2.5;
  const Ensemble ensemble{Matrix(pos)};

  auto terminal = [&](double dt, int steps) {
    StepperConfig config;
    config.method = Method::StandardCBO;
    config.dt = dt;
    config.noise = NoiseModel(NoiseVariant::Isotropic, 0.0);
    config.schedule = BetaSchedule::fixed(1.0);
    const Trajectory traj = run(config, ensemble, obj, steps, 0, steps);
    return Matrix(traj.final_snapshot().ensemble.positions);
  };

  const Matrix coarse = terminal(0.1, 10);    // T = 1
  const Matrix medium = terminal(0.05, 20);
  const Matrix fine = terminal(0.025, 40);
  const double e1 = (coarse - medium).norm();
  const double e2 = (medium - fine).norm();
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("consensus contraction: diameter never grows without noise") {
  const Ensemble start = random_ensemble(15, 2, 11);
  StepperConfig config;
  config.method = Method::StandardCBO;
  config.dt = 1.0;  // boundary of the admissible step
  config.noise = NoiseModel(NoiseVariant::Isotropic, 0.0);
  config.schedule = BetaSchedule::fixed(3.0);
  const Trajectory traj = run(config, start, norm_objective(2), 25, 11, 1);
  double previous = pos_inf;
  for (const Snapshot& snap : traj.snapshots) {
    double diameter = 0.0;
    const Matrix& p = snap.ensemble.positions;
    for (int i = 0; i < p.rows(); ++i) {
      for (int j = i + 1; j < p.rows(); ++j) {
        diameter = std::max(diameter, (p.row(i) - p.row(j)).norm());
      }
    }
    CHECK(diameter <= previous + 1e-12);
    previous = diameter;
  }
}

TEST_CASE("recorded beta values follow the exact schedule") {
  const Ensemble ensemble = random_ensemble(4, 1, 12);
  StepperConfig config;
  config.method = Method::StandardCBO;
  config.noise = NoiseModel(NoiseVariant::Isotropic, 0.5);
  config.schedule = BetaSchedule(30.0, 1.01, 40.0);
  Objective obj = norm_objective(1);
  const Trajectory traj = run(config, ensemble, obj, 50, 12, 1);
  double expected = 30.0;
  for (const Snapshot& snap : traj.snapshots) {
    CHECK(snap.beta == expected);
    expected = std::min(expected * 1.01, 40.0);
  }
}

TEST_CASE("a non-finite objective aborts the run with a flagged trajectory") {
  Objective poison;
  poison.name = "poison";
  poison.dim = 1;
  poison.eval = [](const Vector& x) {
    return x[0] > 1.0 ? std::nan("") : x.squaredNorm();
  };
  Matrix pos(3, 1);
  pos << 0.0, 0.5, 2.0;  // third particle poisons the Gibbs weights
  const Ensemble ensemble{Matrix(pos)};

  StepperConfig config;
  config.method = Method::StandardCBO;
  config.noise = NoiseModel(NoiseVariant::Isotropic, 0.5);
  config.schedule = BetaSchedule::fixed(1.0);

  WarnHandler previous = set_warn_handler(nullptr);
  const Trajectory traj = run(config, ensemble, poison, 10, 13, 1);
  set_warn_handler(previous);
  CHECK(traj.failed);
  CHECK(traj.snapshots.empty());
}

TEST_CASE("stepper validation") {
  const Ensemble ensemble = random_ensemble(3, 1, 14);
  auto streams = particle_streams(14, 3);
  Matrix means(3, 1);
  means.setZero();
  CHECK_THROWS_AS(
      cbo_step(ensemble, means, 0.0, NoiseModel(NoiseVariant::Isotropic, 1.0),
               streams),
      std::invalid_argument);
  Matrix wrong(2, 1);
  wrong.setZero();
  CHECK_THROWS_AS(
      cbo_step(ensemble, wrong, 0.1, NoiseModel(NoiseVariant::Isotropic, 1.0),
               streams),
      std::invalid_argument);
  Matrix nan_means(3, 1);
  nan_means.setConstant(std::nan(""));
  CHECK_THROWS_AS(
      cbo_step(ensemble, nan_means, 0.1,
               NoiseModel(NoiseVariant::Isotropic, 1.0), streams),
      std::runtime_error);
}
