// Command-line runner for consensus-based optimization and sampling
// experiments: single runs, success-rate tables, sampling experiments,
// diagnostics and the built-in acceptance checks.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "checks.hpp"
#include "polarcbo/diagnostics.hpp"
#include "polarcbo/harness.hpp"
#include "polarcbo/log.hpp"

namespace {

using namespace polarcbo;

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> objective;
  std::optional<int> dim;
  std::optional<std::string> method;
  std::optional<std::string> kernel;
  std::optional<double> kappa;
  std::optional<double> beta0, beta_factor, beta_max;
  std::optional<double> sigma;
  std::optional<std::string> noise;
  std::optional<std::string> lambda_mode;
  std::optional<double> dt;
  std::optional<int> steps;
  std::optional<int> particles;
  std::optional<int> clusters;
  std::optional<double> alpha;
  std::optional<double> init_lo, init_hi;
  std::optional<int> seeds;
  std::optional<std::string> seed_list;
  std::optional<int> stride;
  std::optional<double> detect_threshold;
  std::optional<std::string> shift;
  std::optional<std::string> center_a, center_b;
  std::optional<std::string> init_center;
};

void add_config_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path,
                  "flat key-value config file; flags override its values");
  cmd->add_option("--objective", f.objective, "benchmark name");
  cmd->add_option("--dim", f.dim, "problem dimension");
  cmd->add_option("--method", f.method,
                  "standard-cbo | polarized-cbo | cluster-cbo | standard-cbs "
                  "| polarized-cbs");
  cmd->add_option("--kernel", f.kernel,
                  "gaussian | laplace | bounded-confidence | constant");
  cmd->add_option("--kappa", f.kappa, "kernel length scale (inf allowed)");
  cmd->add_option("--beta0", f.beta0, "initial inverse temperature");
  cmd->add_option("--beta-factor", f.beta_factor,
                  "multiplicative beta growth per step");
  cmd->add_option("--beta-max", f.beta_max, "beta cap");
  cmd->add_option("--sigma", f.sigma, "diffusion strength");
  cmd->add_option("--noise", f.noise, "isotropic | coordinatewise");
  cmd->add_option("--lambda-mode", f.lambda_mode,
                  "optimization | sampling (CBS methods)");
  cmd->add_option("--dt", f.dt, "time step");
  cmd->add_option("--steps", f.steps, "iteration count");
  cmd->add_option("--particles", f.particles, "ensemble size J");
  cmd->add_option("--clusters", f.clusters, "cluster count J_c (cluster-cbo)");
  cmd->add_option("--alpha", f.alpha, "discounting exponent (cluster-cbo)");
  cmd->add_option("--init-lo", f.init_lo, "init box lower corner");
  cmd->add_option("--init-hi", f.init_hi, "init box upper corner");
  cmd->add_option("--seeds", f.seeds, "run seeds 0..n-1");
  cmd->add_option("--seed-list", f.seed_list, "explicit seeds, comma separated");
  cmd->add_option("--stride", f.stride, "snapshot thinning stride");
  cmd->add_option("--detect-threshold", f.detect_threshold,
                  "infinity-norm detection radius");
  cmd->add_option("--shift", f.shift, "shifted-ackley shift, comma separated");
  cmd->add_option("--center-a", f.center_a, "gaussian-mixture center a");
  cmd->add_option("--center-b", f.center_b, "gaussian-mixture center b");
  cmd->add_option("--init-center", f.init_center,
                  "translation of the init box, comma separated");
}

Vector parse_vector_arg(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return v;
}

RunConfig build_config(const CommonFlags& f) {
  RunConfig c;
  if (f.config_path) c = load_config_file(*f.config_path);
  if (f.objective) c.objective = *f.objective;
  if (f.dim) c.dim = *f.dim;
  if (f.method) c.method = method_from_string(*f.method);
  if (f.kernel) c.kernel = kernel_variant_from_string(*f.kernel);
  if (f.kappa) c.kappa = *f.kappa;
  if (f.beta0) c.beta0 = *f.beta0;
  if (f.beta_factor) c.beta_factor = *f.beta_factor;
  if (f.beta_max) c.beta_max = *f.beta_max;
  if (f.sigma) c.sigma = *f.sigma;
  if (f.noise) c.noise = noise_variant_from_string(*f.noise);
  if (f.lambda_mode) c.lambda_mode = lambda_mode_from_string(*f.lambda_mode);
  if (f.dt) c.dt = *f.dt;
  if (f.steps) c.steps = *f.steps;
  if (f.particles) c.particles = *f.particles;
  if (f.clusters) c.clusters = *f.clusters;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.init_lo) c.init_lo = *f.init_lo;
  if (f.init_hi) c.init_hi = *f.init_hi;
  if (f.seeds) {
    c.seeds.clear();
    for (int s = 0; s < *f.seeds; ++s) c.seeds.push_back(s);
  }
  if (f.seed_list) {
    c.seeds.clear();
    std::stringstream ss(*f.seed_list);
    std::string item;
    while (std::getline(ss, item, ',')) c.seeds.push_back(std::stoull(item));
  }
  if (f.stride) c.snapshot_stride = *f.stride;
  if (f.detect_threshold) c.detect_threshold = *f.detect_threshold;
  if (f.shift) c.shift = parse_vector_arg(*f.shift);
  if (f.center_a) c.center_a = parse_vector_arg(*f.center_a);
  if (f.center_b) c.center_b = parse_vector_arg(*f.center_b);
  if (f.init_center) c.init_center = parse_vector_arg(*f.init_center);
  return c.normalized();
}

void write_or_print(const std::vector<RunReport>& reports,
                    const std::string& format, const std::string& out_path) {
  const EmitFormat fmt = emit_format_from_string(format);
  if (out_path.empty()) {
    std::cout << render_results(reports, fmt);
  } else {
    emit_results(reports, fmt, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
}

// Summarizes repeated warnings (cluster-center retention and the like)
// instead of letting a long sweep flood stderr.
struct WarnSummarizer {
  int count = 0;
  WarnHandler previous;
  WarnSummarizer() {
    previous = set_warn_handler([this](const std::string& message) {
      if (++count <= 3) {
        std::cerr << "[polarcbo] " << message << "\n";
      }
    });
  }
  ~WarnSummarizer() {
    set_warn_handler(previous);
    if (count > 3) {
      std::cerr << "[polarcbo] (" << count - 3 << " further warnings)\n";
    }
  }
};

int cmd_run(const CommonFlags& flags, const std::string& format,
            const std::string& out_path, const std::string& dump_path,
            int jobs) {
  RunConfig config = build_config(flags);
  validate(config);
  WarnSummarizer warnings;

  if (!dump_path.empty()) {
    const Objective objective = objective_for(config);
    const Ensemble start = initial_ensemble(config, config.seeds.front());
    const Trajectory traj =
        run(stepper_for(config), start, objective, config.steps,
            config.seeds.front(), config.snapshot_stride);
    dump_trajectory_csv(traj, dump_path);
    std::cout << "trajectory (seed " << config.seeds.front() << ") -> "
              << dump_path << "\n";
  }

  const std::vector<RunReport> reports = run_table({config}, jobs);
  write_or_print(reports, format, out_path);
  return reports.front().failed_count == 0 ? 0 : 1;
}

int cmd_table(const std::string& preset_name,
              const std::vector<std::string>& config_paths,
              const std::optional<int>& seeds, const std::string& format,
              const std::string& out_path, int jobs) {
  std::vector<RunConfig> configs;
  if (!preset_name.empty()) {
    configs = preset(preset_name);
  }
  for (const std::string& path : config_paths) {
    configs.push_back(load_config_file(path));
  }
  if (configs.empty()) {
    std::cerr << "table: need --preset or --config\n";
    return 2;
  }
  if (seeds) {
    for (RunConfig& c : configs) {
      c.seeds.clear();
      for (int s = 0; s < *seeds; ++s) c.seeds.push_back(s);
    }
  }
  for (const RunConfig& c : configs) validate(c);
  WarnSummarizer warnings;
  const std::vector<RunReport> reports = run_table(configs, jobs);
  write_or_print(reports, format, out_path);
  int failed = 0;
  for (const RunReport& r : reports) failed += r.failed_count;
  return failed == 0 ? 0 : 1;
}

int cmd_sample(const CommonFlags& flags, const std::string& out_path) {
  RunConfig config = build_config(flags);
  if (!is_sampling_method(config.method)) {
    config.method = Method::PolarizedCBS;
    config.kernel = config.kernel == KernelVariant::Constant
                        ? KernelVariant::Gaussian
                        : config.kernel;
  }
  config.lambda_mode = LambdaMode::Sampling;
  if (config.objective == "ackley") config.objective = "gaussian-mixture";
  config = config.normalized();
  validate(config);
  WarnSummarizer warnings;

  const Objective target = objective_for(config);
  const SamplingReport report =
      run_sampling(config, target, config.steps, config.seeds.front());
  const std::string json = sampling_report_to_json(report);
  if (out_path.empty()) {
    std::cout << json << "\n";
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << json << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  for (const ModeStat& m : report.modes) {
    std::printf("mode (%.3g", m.center[0]);
    for (Eigen::Index n = 1; n < m.center.size(); ++n) {
      std::printf(", %.3g", m.center[n]);
    }
    std::printf("): %d particles%s\n", m.count,
                m.degenerate ? " [degenerate]" : "");
  }
  return report.failed ? 1 : 0;
}

int cmd_diag(std::uint64_t seed, const std::string& out_path) {
  WarnSummarizer warnings;
  // Stationarity of a unit Gaussian target probed at the origin and one
  // offset point, plus the Lyapunov decay fit on a quadratic.
  GaussianTarget target;
  target.mean = Vector::Zero(1);
  target.covariance = Matrix::Identity(1, 1);
  target.kernel_covariance = Matrix::Identity(1, 1);
  Matrix queries(2, 1);
  queries << 0.0, 1.0;
  RngStream rng(seed, kDiagnosticsStream);
  const StationarityReport stat =
      stationarity_check(target, 1.0, 100000, queries, rng);

  const Objective quad = quadratic(Vector::Zero(1), Matrix::Identity(1, 1));
  RngStream init_rng(seed, kPositionInitStream);
  const Ensemble start = init_uniform(40, 1, -3.0, 3.0, init_rng);
  const Trajectory flow =
      proximal_flow_run(quad, 1.0, start, 0.01, 0.0, 1500, seed, 20);
  const DecayFit fit = lyapunov_decay_rate(flow, quad, 1.0);

  std::string json = stationarity_report_to_json(stat);
  std::printf("stationarity: means within 5 SE: %s, worst cov rel err %.4f\n",
              stat.all_means_within_band() ? "yes" : "NO",
              stat.max_cov_rel_error());
  std::printf("lyapunov decay: slope %.4f (R^2 %.4f over %d points)\n",
              fit.slope, fit.r_squared, fit.points_used);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << json << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  const bool ok = stat.all_means_within_band() &&
                  stat.max_cov_rel_error() <= 0.05 && fit.slope < 0.0;
  return ok ? 0 : 1;
}

int cmd_check(const std::vector<std::string>& only, int jobs) {
  std::vector<std::string> names =
      only.empty() ? polarcbo::checks::check_names() : only;
  bool all_pass = true;
  for (const std::string& name : names) {
    const auto result = polarcbo::checks::run_check(name, jobs);
    std::cout << polarcbo::checks::format_result(result) << "\n" << std::flush;
    if (!result.pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarized consensus-based optimization and sampling"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_format = "csv", run_out, run_dump;
  int run_jobs = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "run a single configuration");
  add_config_flags(run_cmd, run_flags);
  run_cmd->add_option("--format", run_format, "csv | json | markdown");
  run_cmd->add_option("--out", run_out, "output path (stdout if omitted)");
  run_cmd->add_option("--dump-trajectory", run_dump,
                      "write thinned snapshots of the first seed as CSV");
  run_cmd->add_option("--jobs", run_jobs, "worker threads (0 = hardware)");

  std::string table_preset;
  std::vector<std::string> table_configs;
  std::optional<int> table_seeds;
  std::string table_format = "csv", table_out;
  int table_jobs = 0;
  CLI::App* table_cmd =
      app.add_subcommand("table", "run a preset or config-file sweep");
  table_cmd->add_option("--preset", table_preset,
                        "table1 | table1-cell | table2 | table2-cell | table3 "
                        "| ackley-unimodal");
  table_cmd->add_option("--config", table_configs,
                        "config file(s), one sweep row each");
  table_cmd->add_option("--seeds", table_seeds,
                        "override every row to seeds 0..n-1");
  table_cmd->add_option("--format", table_format, "csv | json | markdown");
  table_cmd->add_option("--out", table_out, "output path (stdout if omitted)");
  table_cmd->add_option("--jobs", table_jobs, "worker threads (0 = hardware)");

  CommonFlags sample_flags;
  std::string sample_out;
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "consensus-based sampling experiment");
  add_config_flags(sample_cmd, sample_flags);
  sample_cmd->add_option("--out", sample_out, "JSON report path");

  std::uint64_t diag_seed = 0;
  std::string diag_out;
  CLI::App* diag_cmd =
      app.add_subcommand("diag", "stationarity and Lyapunov diagnostics");
  diag_cmd->add_option("--seed", diag_seed, "master seed");
  diag_cmd->add_option("--out", diag_out, "JSON report path");

  std::vector<std::string> check_only;
  int check_jobs = 0;
  CLI::App* check_cmd =
      app.add_subcommand("check", "run the acceptance criteria");
  check_cmd->add_option("--only", check_only, "subset of checks to run");
  check_cmd->add_option("--jobs", check_jobs, "worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return cmd_run(run_flags, run_format, run_out, run_dump, run_jobs);
    }
    if (table_cmd->parsed()) {
      return cmd_table(table_preset, table_configs, table_seeds, table_format,
                       table_out, table_jobs);
    }
    if (sample_cmd->parsed()) return cmd_sample(sample_flags, sample_out);
    if (diag_cmd->parsed()) return cmd_diag(diag_seed, diag_out);
    if (check_cmd->parsed()) return cmd_check(check_only, check_jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
