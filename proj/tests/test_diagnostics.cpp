#include <doctest.h>

#include <cmath>

#include "polarcbo/diagnostics.hpp"
#include "polarcbo/means.hpp"

using namespace polarcbo;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(values.size());
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Same quadratic bowl but without the quadratic tag, forcing the
// finite-difference Newton path.
Objective untagged_bowl(const Vector& m) {
  Objective obj;
  obj.name = "bowl";
  obj.dim = static_cast<int>(m.size());
  obj.eval = [m](const Vector& x) { return 0.5 * (x - m).squaredNorm(); };
  return obj;
}

}  // namespace

TEST_CASE("proximal closed form on the unit quadratic") {
  const Vector m = vec({2.0, -1.0});
  const Objective quad = quadratic(m, Matrix::Identity(2, 2));
  const double kappa = 0.8;
  const Vector x = vec({0.5, 1.5});
  const Vector p = proximal(quad, kappa, x);
  const Vector expected = (x + kappa * kappa * m) / (1.0 + kappa * kappa);
  CHECK((p - expected).norm() <= 1e-12);

  // proximal of the minimizer is the minimizer
  CHECK((proximal(quad, kappa, m) - m).norm() <= 1e-12);
}

TEST_CASE("finite-difference path agrees with the closed form") {
  const Vector m = vec({-0.3, 0.9});
  const Objective tagged = quadratic(m, Matrix::Identity(2, 2));
  const Objective untagged = untagged_bowl(m);
  RngStream rng(21, kDiagnosticsStream);
  for (int t = 0; t < 20; ++t) {
    const Vector x = vec({rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)});
    const Vector via_solve = proximal(tagged, 1.0, x);
    const Vector via_newton = proximal(untagged, 1.0, x, 1e-10);
    CHECK((via_solve - via_newton).norm() <= 1e-8);
    // accepted solutions satisfy the optimality residual
    const Vector residual = via_newton - x + (via_newton - m);
    CHECK(residual.norm() <= 1e-9);
  }
}

TEST_CASE("kappa -> 0 makes the proximal map the identity") {
  const Objective quad =
      quadratic(vec({4.0, 4.0}), Matrix::Identity(2, 2));
  const Vector x = vec({-2.0, 1.0});
  const Vector p = proximal(quad, 1e-4, x);
  CHECK((p - x).norm() <= 1e-6);
}

TEST_CASE("proximal reports non-convergence with the last residual") {
  const Objective bowl = untagged_bowl(vec({3.0}));
  bool threw = false;
  try {
    proximal(bowl, 1.0, vec({0.0}), 1e-12, 0);
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("proximal is firmly nonexpansive on quadratics") {
  Matrix precision(2, 2);
  precision << 1.5, 0.4, 0.4, 0.9;
  const Objective quad = quadratic(vec({0.5, -0.5}), precision);
  RngStream rng(22, kDiagnosticsStream);
  for (int t = 0; t < 1000; ++t) {
    const Vector x = vec({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
    const Vector y = vec({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
    const double lhs = (proximal(quad, 1.2, x) - proximal(quad, 1.2, y)).norm();
    CHECK(lhs <= (x - y).norm() + 1e-12);
  }
}

TEST_CASE("lyapunov functional closed form and permutation symmetry") {
  const Objective quad = quadratic(vec({0.0}), Matrix::Identity(1, 1));
  const double kappa = 1.3;

  // single particle at x: L = ((kappa^2 / (1 + kappa^2))^2 x^2) / 2
  const double x = 1.7;
  Matrix single(1, 1);
  single << x;
  const double ratio = kappa * kappa / (1.0 + kappa * kappa);
  const double expected = 0.5 * ratio * ratio * x * x;
  CHECK(lyapunov(Ensemble{Matrix(single)}, quad, kappa) ==
        doctest::Approx(expected).epsilon(1e-12));

  // all particles at the minimizer: exactly zero characterization
  Matrix at_min = Matrix::Zero(5, 1);
  CHECK(lyapunov(Ensemble{Matrix(at_min)}, quad, kappa) <= 1e-20);

  Matrix cloud(3, 1);
  cloud << -1.0, 0.3, 2.0;
  Matrix permuted(3, 1);
  permuted << 0.3, 2.0, -1.0;
  CHECK(lyapunov(Ensemble{Matrix(cloud)}, quad, kappa) ==
        doctest::Approx(lyapunov(Ensemble{Matrix(permuted)}, quad, kappa))
            .epsilon(1e-15));
}

TEST_CASE("lyapunov zero characterization in both directions") {
  const Objective quad = quadratic(vec({1.0}), Matrix::Identity(1, 1));
  const double kappa = 1.0;

  Matrix near_min(2, 1);
  near_min << 1.0 + 1e-6, 1.0 - 1e-6;
  const double small = lyapunov(Ensemble{Matrix(near_min)}, quad, kappa);
  CHECK(small <= 1e-10);

  Matrix off(2, 1);
  off << 1.0, 2.0;  // one particle clearly away from argmin
  CHECK(lyapunov(Ensemble{Matrix(off)}, quad, kappa) > 1e-10);
}

TEST_CASE("finite-beta lyapunov uses the kernel-weighted means") {
  Objective obj;
  obj.name = "norm";
  obj.dim = 2;
  obj.eval = [](const Vector& x) { return x.squaredNorm(); };
  RngStream rng(23, kPositionInitStream);
  const Ensemble ensemble = init_uniform(10, 2, -2.0, 2.0, rng);
  const Kernel kernel = Kernel::gaussian(0.9);
  const double direct =
      (ensemble.positions - polarized_means(ensemble, kernel, obj, 2.0))
          .squaredNorm() /
      (2.0 * 10);
  CHECK(lyapunov_beta(ensemble, kernel, obj, 2.0) ==
        doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("noiseless proximal flow decays log-linearly at the exact rate") {
  const Objective quad = quadratic(vec({0.5}), Matrix::Identity(1, 1));
  const double kappa = 1.0;
  const double dt = 0.01;

  RngStream init_rng(3, kPositionInitStream);
  const Ensemble start = init_uniform(20, 1, -3.0, 3.0, init_rng);
  const Trajectory flow =
      proximal_flow_run(quad, kappa, start, dt, 0.0, 1200, 3, 20);
  const DecayFit fit = lyapunov_decay_rate(flow, quad, kappa);

  // x - p(x) = c (x - m) with c = kappa^2 mu / (1 + kappa^2 mu) = 1/2, so
  // each step scales it by (1 - dt c) and log L falls by 2 log(1 - dt c)/dt
  // per unit time.
  const double expected_slope = 2.0 * std::log(1.0 - dt * 0.5) / dt;
  CHECK(fit.slope == doctest::Approx(expected_slope).epsilon(1e-3));
  CHECK(fit.r_squared >= 0.999);
  CHECK(fit.points_used >= 3);
}

TEST_CASE("a trajectory resting at the minimizer has no usable snapshots") {
  const Objective quad = quadratic(vec({0.0}), Matrix::Identity(1, 1));
  const Ensemble at_min{Matrix::Zero(4, 1)};
  const Trajectory still =
      proximal_flow_run(quad, 1.0, at_min, 0.01, 0.0, 100, 1, 10);
  CHECK_THROWS_AS(lyapunov_decay_rate(still, quad, 1.0), std::runtime_error);
}

TEST_CASE("stationary oracle closed forms") {
  GaussianTarget target;
  target.mean = Vector::Zero(2);
  target.covariance = Matrix::Identity(2, 2);
  target.kernel_covariance = Matrix::Identity(2, 2);

  // Sigma_1 = Sigma_2 = I, m = 0, beta = 1: Sigma_3 = I/3, m_x = x/3
  const Matrix sigma3 = stationary_sigma3(target, 1.0);
  CHECK((sigma3 - Matrix::Identity(2, 2) / 3.0).norm() <= 1e-14);
  const Vector x = vec({1.5, -0.9});
  CHECK((stationary_mean_oracle(target, 1.0, x) - x / 3.0).norm() <= 1e-14);

  // fixed point at the target mean
  CHECK((stationary_mean_oracle(target, 1.0, target.mean) - target.mean)
            .norm() <= 1e-14);

  // beta -> infinity pins the mean to m
  CHECK((stationary_mean_oracle(target, 1e12, x) - target.mean).norm() <=
        1e-11);
}

TEST_CASE("oracle self-consistency: wide kernels forget the query point") {
  GaussianTarget target;
  target.mean = vec({0.7, -0.2});
  Matrix cov(2, 2);
  cov << 1.1, 0.3, 0.3, 0.8;
  target.covariance = cov;
  target.kernel_covariance = 1e8 * Matrix::Identity(2, 2);
  const double beta = 2.0;

  const Vector x = vec({5.0, -3.0});
  const Vector m_x = stationary_mean_oracle(target, beta, x);
  CHECK((m_x - target.mean).norm() <= 1e-5);

  // and the Gibbs mean of a large tempered sample agrees
  Matrix precision = cov.inverse();
  precision = 0.5 * (precision + precision.transpose());
  const Objective quad = quadratic(target.mean, precision);
  RngStream rng(24, kDiagnosticsStream);
  const Matrix chol = Eigen::LLT<Matrix>(cov).matrixL();
  Matrix samples(200000, 2);
  for (int s = 0; s < samples.rows(); ++s) {
    samples.row(s) = (target.mean + chol * rng.normal_vector(2)).transpose();
  }
  const RowVector gibbs_mean =
      standard_mean(Ensemble{Matrix(samples)}, quad, beta);
  CHECK((gibbs_mean.transpose() - target.mean).norm() <= 0.02);
}

TEST_CASE("stationarity check validates the unit 1-d example") {
  GaussianTarget target;
  target.mean = Vector::Zero(1);
  target.covariance = Matrix::Identity(1, 1);
  target.kernel_covariance = Matrix::Identity(1, 1);

  Matrix queries(2, 1);
  queries << 1.0, 0.0;
  RngStream rng(25, kDiagnosticsStream);
  const StationarityReport report =
      stationarity_check(target, 1.0, 100000, queries, rng);

  REQUIRE(report.queries.size() == 2);
  // closed form at x = 1: mean 1/3, covariance 1/3
  CHECK(report.queries[0].oracle_mean[0] == doctest::Approx(1.0 / 3.0));
  CHECK(report.queries[0].oracle_cov(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(report.queries[0].mean_within_band);
  CHECK(report.queries[0].cov_rel_error <= 0.05);
  // query at the target mean
  CHECK(report.queries[1].mean_within_band);
  CHECK(std::abs(report.queries[1].empirical_mean[0]) <=
        5.0 * report.queries[1].standard_error[0]);
}

TEST_CASE("stationarity error shrinks roughly like 1/sqrt(n)") {
  GaussianTarget target;
  target.mean = Vector::Zero(1);
  target.covariance = Matrix::Identity(1, 1);
  target.kernel_covariance = Matrix::Identity(1, 1);
  Matrix query(1, 1);
  query << 0.8;

  auto mean_abs_error = [&](int n, std::uint64_t seed_base) {
    double total = 0.0;
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      RngStream rng(seed_base + rep, kDiagnosticsStream);
      const StationarityReport report =
          stationarity_check(target, 1.0, n, query, rng);
      total += std::abs(report.queries[0].empirical_mean[0] -
                        report.queries[0].oracle_mean[0]);
    }
    return total / 5.0;
  };

  const double coarse = mean_abs_error(10000, 100);
  const double fine = mean_abs_error(1000000, 200);
  CHECK(fine < coarse / 3.0);  // expected factor is 10
}

TEST_CASE("whitened path handles anisotropic kernel covariance") {
  GaussianTarget target;
  target.mean = vec({0.3, -0.6});
  Matrix cov(2, 2);
  cov << 1.4, -0.2, -0.2, 0.7;
  target.covariance = cov;
  Matrix kcov(2, 2);
  kcov << 0.5, 0.1, 0.1, 0.9;
  target.kernel_covariance = kcov;

  Matrix queries(2, 2);
  queries << 0.3, -0.6, 0.8, -0.1;
  RngStream rng(26, kDiagnosticsStream);
  const StationarityReport report =
      stationarity_check(target, 2.0, 50000, queries, rng);
  CHECK(report.all_means_within_band());
  CHECK(report.max_cov_rel_error() <= 0.08);
}

TEST_CASE("gaussian target validation") {
  GaussianTarget target;
  target.mean = Vector::Zero(2);
  target.covariance = Matrix::Identity(2, 2);
  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  target.kernel_covariance = bad;
  CHECK_THROWS_AS(stationary_sigma3(target, 1.0), std::invalid_argument);

  target.kernel_covariance = Matrix::Identity(2, 2);
  Matrix q(1, 2);
  q.setZero();
  RngStream rng(27, kDiagnosticsStream);
  CHECK_THROWS_AS(stationarity_check(target, 1.0, 10, q, rng),
                  std::invalid_argument);
}
