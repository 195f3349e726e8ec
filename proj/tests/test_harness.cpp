#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polarcbo/harness.hpp"
#include "polarcbo/log.hpp"

using namespace polarcbo;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(values.size());
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct QuietWarnings {
  WarnHandler previous;
  QuietWarnings() { previous = set_warn_handler(nullptr); }
  ~QuietWarnings() { set_warn_handler(previous); }
};

}  // namespace

TEST_CASE("detect_minima thresholds in the infinity norm") {
  const std::vector<Vector> minimizers = {vec({3.0, 2.0}), vec({0.0, 0.0})};
  Matrix means(1, 2);

  means << 3.2, 2.1;  // distance 0.2
  CHECK(detect_minima(means, minimizers) == std::vector<int>{0});

  means << 3.0, 2.0;  // exact hit
  CHECK(detect_minima(means, minimizers) == std::vector<int>{0});

  means << 3.3, 2.0;  // distance 0.3
  CHECK(detect_minima(means, minimizers).empty());

  means << 3.25, 2.0;  // inclusive boundary
  CHECK(detect_minima(means, minimizers) == std::vector<int>{0});

  Matrix broadcast(4, 2);
  broadcast << 1.5, 1.0, 1.5, 1.0, 1.5, 1.0, 1.5, 1.0;
  // identical rows cannot cover two well-separated minimizers
  CHECK(detect_minima(broadcast, minimizers).size() <= 1);

  CHECK_THROWS_AS(detect_minima(means, {}), std::invalid_argument);
}

TEST_CASE("config validation catches inconsistent settings") {
  RunConfig config;
  config.objective = "multimodal-rastrigin";
  config.dim = 2;
  CHECK_NOTHROW(validate(config));

  RunConfig wrong_dim = config;
  wrong_dim.dim = 3;  // objective is fixed 2-d
  CHECK_THROWS_AS(validate(wrong_dim), std::invalid_argument);

  RunConfig cluster = config;
  cluster.method = Method::ClusterCBO;
  cluster.clusters = 0;
  CHECK_THROWS_AS(validate(cluster), std::invalid_argument);
  cluster.clusters = 1000;  // more clusters than particles
  CHECK_THROWS_AS(validate(cluster), std::invalid_argument);

  RunConfig no_seeds = config;
  no_seeds.seeds.clear();
  CHECK_THROWS_AS(validate(no_seeds), std::invalid_argument);

  RunConfig bad_box = config;
  bad_box.init_lo = 2.0;
  bad_box.init_hi = -2.0;
  CHECK_THROWS_AS(validate(bad_box), std::invalid_argument);
}

TEST_CASE("config json round trip, including infinite kappa and alpha") {
  RunConfig config;
  config.objective = "multimodal-ackley";
  config.dim = 10;
  config.method = Method::ClusterCBO;
  config.kernel = KernelVariant::Gaussian;
  config.kappa = pos_inf;
  config.beta0 = 30.0;
  config.beta_factor = 1.01;
  config.beta_max = 1e7;
  config.sigma = 7.5;
  config.noise = NoiseVariant::Coordinatewise;
  config.steps = 1000;
  config.particles = 400;
  config.clusters = 10;
  config.alpha = pos_inf;
  config.seeds = {3, 1, 4};
  const RunConfig normalized = config.normalized();

  const std::string text = config_to_json(normalized);
  const RunConfig parsed = config_from_json(text);
  CHECK(parsed == normalized);
  CHECK(std::isinf(parsed.kappa));
  CHECK(std::isinf(parsed.alpha));
  CHECK(config_hash(parsed) == config_hash(normalized));
}

TEST_CASE("key-value config round trip mirrors the flag names") {
  RunConfig config;
  config.objective = "shifted-ackley";
  config.dim = 2;
  config.shift = vec({3.0, 2.0});
  config.method = Method::PolarizedCBO;
  config.kernel = KernelVariant::Laplace;
  config.kappa = 0.05;
  config.sigma = 1.0;
  config.steps = 250;
  config.particles = 64;
  config.seeds = {0, 1, 2};
  const RunConfig normalized = config.normalized();

  const RunConfig parsed = config_from_keyvalue(config_to_keyvalue(normalized));
  CHECK(parsed == normalized);

  const RunConfig from_text = config_from_keyvalue(
      "# comment\n"
      "objective = rastrigin\n"
      "dim = 3\n"
      "method = standard-cbo\n"
      "kappa = inf\n"
      "seeds = 4\n");
  CHECK(from_text.objective == "rastrigin");
  CHECK(from_text.dim == 3);
  CHECK(std::isinf(from_text.kappa));
  CHECK(from_text.seeds == std::vector<std::uint64_t>{0, 1, 2, 3});

  CHECK_THROWS_AS(config_from_keyvalue("bogus-key = 1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_keyvalue("no equals sign\n"),
                  std::invalid_argument);
}

TEST_CASE("normalization clears fields that do not apply") {
  RunConfig config;
  config.objective = "ackley";
  config.method = Method::StandardCBO;
  config.clusters = 25;        // meaningless without cluster-cbo
  config.alpha = 3.0;
  config.shift = vec({1.0});   // meaningless for plain ackley
  const RunConfig normalized = config.normalized();
  CHECK(normalized.clusters == 0);
  CHECK(normalized.alpha == 0.0);
  CHECK(!normalized.shift.has_value());
}

TEST_CASE("steps = 0 in a tight box detects the single minimizer always") {
  RunConfig config;
  config.objective = "quadratic";
  config.dim = 2;
  config.method = Method::StandardCBO;
  config.steps = 0;
  config.particles = 20;
  config.init_lo = -0.1;
  config.init_hi = 0.1;
  config.seeds = {0, 1, 2, 3, 4};
  config.snapshot_stride = 1;

  const std::vector<RunReport> reports = run_table({config}, 1);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].frac_at_least[0] == 1.0);  // hull containment forces a hit
  CHECK(reports[0].frac_at_least[1] == 0.0);  // only one minimizer exists
  CHECK(reports[0].frac_at_least[2] == 0.0);
  CHECK(reports[0].failed_count == 0);
}

TEST_CASE("detection fractions are monotone and seeds are isolated") {
  QuietWarnings quiet;
  RunConfig config;
  config.objective = "multimodal-rastrigin";
  config.dim = 2;
  config.method = Method::PolarizedCBO;
  config.kernel = KernelVariant::Gaussian;
  config.kappa = 0.5;
  config.sigma = 0.7;
  config.steps = 150;
  config.particles = 40;
  config.seeds = {0, 1, 2, 3};
  config.snapshot_stride = 150;

  const std::vector<RunReport> reports = run_table({config}, 2);
  const RunReport& report = reports[0];
  CHECK(report.frac_at_least[0] >= report.frac_at_least[1]);
  CHECK(report.frac_at_least[1] >= report.frac_at_least[2]);

  // dropping seed 1 leaves the other cells untouched
  RunConfig fewer = config;
  fewer.seeds = {0, 2, 3};
  const std::vector<RunReport> reduced = run_table({fewer}, 2);
  REQUIRE(reduced[0].seeds.size() == 3);
  auto strip_time = [](SeedResult r) {
    r.wall_seconds = 0.0;
    return r;
  };
  CHECK(strip_time(reduced[0].seeds[0]) == strip_time(report.seeds[0]));
  CHECK(strip_time(reduced[0].seeds[1]) == strip_time(report.seeds[2]));
  CHECK(strip_time(reduced[0].seeds[2]) == strip_time(report.seeds[3]));
}

TEST_CASE("emit: header-only csv, byte determinism, json round trip") {
  const std::string path = "test_emit_output.csv";
  emit_results({}, EmitFormat::Csv, path);
  CHECK(slurp(path) ==
        "config_hash,objective,method,kernel,kappa,particles,clusters,alpha,"
        "sigma,seed_count,frac_ge1,frac_ge2,frac_ge3,mean_wall_seconds\n");
  std::remove(path.c_str());

  QuietWarnings quiet;
  RunConfig config;
  config.objective = "multimodal-ackley";
  config.dim = 2;
  config.method = Method::PolarizedCBO;
  config.kernel = KernelVariant::Gaussian;
  config.kappa = 0.5;
  config.sigma = 1.0;
  config.steps = 60;
  config.particles = 30;
  config.seeds = {0, 1};
  config.snapshot_stride = 60;
  const std::vector<RunReport> reports = run_table({config}, 2);

  const std::string csv_once = render_results(reports, EmitFormat::Csv);
  const std::string csv_again = render_results(reports, EmitFormat::Csv);
  CHECK(csv_once == csv_again);

  const std::vector<RunReport> parsed =
      reports_from_json(reports_to_json(reports));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed == reports);

  // rerunning the pipeline is byte-identical once timings are zeroed
  const std::vector<RunReport> rerun = run_table({config}, 1);
  const EmitOptions no_timing{true};
  CHECK(render_results(reports, EmitFormat::Json, no_timing) ==
        render_results(rerun, EmitFormat::Json, no_timing));

  const std::string markdown =
      render_results(reports, EmitFormat::MarkdownTable);
  CHECK(markdown.find("|config_hash|") == 0);
}

TEST_CASE("trajectory dump carries positions and means per row") {
  RunConfig config;
  config.objective = "quadratic";
  config.dim = 1;
  config.method = Method::StandardCBO;
  config.steps = 10;
  config.particles = 3;
  config.seeds = {0};
  config.snapshot_stride = 5;

  const Objective objective = objective_for(config);
  RngStream init_rng(0, kPositionInitStream);
  const Ensemble start =
      init_uniform(config.particles, config.dim, -1.0, 1.0, init_rng);
  const Trajectory traj = run(stepper_for(config), start, objective,
                              config.steps, 0, config.snapshot_stride);
  const std::string path = "test_traj.csv";
  dump_trajectory_csv(traj, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("time,beta,particle,x0,m0\n", 0) == 0);
  // snapshots at steps 0, 5 and the final state, 3 particles each
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 * 3);
  std::remove(path.c_str());
}

TEST_CASE("presets are valid and hit the documented cells") {
  for (const std::string& name : preset_names()) {
    const std::vector<RunConfig> configs = preset(name);
    CHECK(!configs.empty());
    for (const RunConfig& c : configs) {
      CHECK_NOTHROW(validate(c));
    }
  }
  CHECK(preset("table1").size() == 16);      // 4 J-values x (3 kappas + CBO)
  CHECK(preset("table1-cell").size() == 2);  // cell + CBO control
  CHECK(preset("table2-cell").size() == 1);
  CHECK(preset("table3").size() == 24);
  const std::vector<RunConfig> cell = preset("table2-cell");
  CHECK(cell[0].method == Method::ClusterCBO);
  CHECK(cell[0].particles == 400);
  CHECK(cell[0].kappa == 0.1);
  CHECK(cell[0].alpha == 5.0);
  CHECK(cell[0].beta0 == 30.0);
  CHECK(cell[0].beta_max == 1e7);
  CHECK(cell[0].noise == NoiseVariant::Coordinatewise);
  CHECK(cell[0].sigma == 7.5);
  CHECK_THROWS_AS(preset("nope"), std::invalid_argument);
}

TEST_CASE("run_sampling validates its preconditions") {
  RunConfig config = preset("sampling-far")[0];
  const Objective target = objective_for(config);

  RunConfig not_cbs = config;
  not_cbs.method = Method::PolarizedCBO;
  CHECK_THROWS_AS(run_sampling(not_cbs.normalized(), target, 10, 0),
                  std::invalid_argument);

  RunConfig wrong_mode = config;
  wrong_mode.lambda_mode = LambdaMode::Optimization;
  CHECK_THROWS_AS(run_sampling(wrong_mode, target, 10, 0),
                  std::invalid_argument);

  const Objective optimization_target = multimodal_ackley(2);
  CHECK_THROWS_AS(run_sampling(config, optimization_target, 10, 0),
                  std::invalid_argument);
}

TEST_CASE("polarized CBS populates both far-apart modes, standard CBS "
          "collapses into one") {
  QuietWarnings quiet;
  const std::vector<RunConfig> configs = preset("sampling-far");
  const RunConfig polar = configs[0];
  const RunConfig standard = configs[1];
  const Objective target = objective_for(polar);

  // the polarized sampler stays bimodal well before full equilibration
  const SamplingReport polar_report = run_sampling(polar, target, 2000, 0);
  REQUIRE(polar_report.modes.size() == 2);
  const int total = polar_report.modes[0].count + polar_report.modes[1].count;
  CHECK(total == polar.particles);
  CHECK(polar_report.modes[0].count >= polar.particles / 10);
  CHECK(polar_report.modes[1].count >= polar.particles / 10);

  const SamplingReport standard_report =
      run_sampling(standard, target, standard.steps, 0);
  const int lo = std::min(standard_report.modes[0].count,
                          standard_report.modes[1].count);
  CHECK(lo == 0);  // a single shared mean cannot straddle the basins

  // serialization support for external analysis
  const std::string json = sampling_report_to_json(polar_report);
  CHECK(json.find("\"modes\"") != std::string::npos);
}

TEST_CASE("polarized CBS on a single Gaussian reproduces its covariance") {
  QuietWarnings quiet;
  Matrix cov(2, 2);
  cov << 0.8, 0.2, 0.2, 0.6;
  Matrix precision = cov.inverse();
  precision = 0.5 * (precision + precision.transpose());
  const Vector center = vec({0.4, -0.8});

  Objective target;
  target.name = "gaussian-target";
  target.dim = 2;
  target.eval = [center, precision](const Vector& x) {
    const Vector r = x - center;
    return 0.5 * r.dot(precision * r);
  };
  target.modes = {center};

  RunConfig config;
  config.objective = "quadratic";  // provenance label only
  config.dim = 2;
  config.method = Method::PolarizedCBS;
  config.kernel = KernelVariant::Gaussian;
  config.kappa = 1.0;
  config.lambda_mode = LambdaMode::Sampling;
  config.beta0 = config.beta_factor = 1.0;
  config.beta_max = 1.0;
  config.sigma = 0.0;
  config.dt = 0.01;
  config.particles = 400;
  config.seeds = {0};
  config.snapshot_stride = 1500;

  const SamplingReport report = run_sampling(config, target, 1500, 0);
  REQUIRE(report.modes.size() == 1);
  CHECK(!report.modes[0].degenerate);
  CHECK(report.modes[0].count == 400);
  const double rel_error = (report.modes[0].covariance - cov).norm() /
                           cov.norm();
  CHECK(rel_error <= 0.25);
  CHECK((report.modes[0].mean - center).norm() <= 0.25);
}
