#include "polarcbo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace polarcbo {

using json = nlohmann::ordered_json;

namespace {

// ---- canonical float/vector helpers ------------------------------------

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double number_from(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return pos_inf;
    if (s == "-inf") return neg_inf;
    throw std::invalid_argument("expected number or \"inf\": " + s);
  }
  return j.get<double>();
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(i, k) = rows[i][k].get<double>();
    }
  }
  return m;
}

bool vectors_equal(const std::optional<Vector>& a,
                   const std::optional<Vector>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->size() == b->size() && *a == *b;
}

// ---- config (de)serialization -------------------------------------------

json config_to_json_obj(const RunConfig& raw) {
  const RunConfig c = raw.normalized();
  json j;
  j["objective"] = c.objective;
  j["dim"] = c.dim;
  if (c.shift) j["shift"] = vector_to_json(*c.shift);
  if (c.center_a) j["center_a"] = vector_to_json(*c.center_a);
  if (c.center_b) j["center_b"] = vector_to_json(*c.center_b);
  j["method"] = to_string(c.method);
  j["kernel"] = to_string(c.kernel);
  j["kappa"] = number_or_inf(c.kappa);
  j["beta0"] = c.beta0;
  j["beta_factor"] = c.beta_factor;
  j["beta_max"] = number_or_inf(c.beta_max);
  j["sigma"] = c.sigma;
  j["noise"] = to_string(c.noise);
  if (is_sampling_method(c.method)) j["lambda_mode"] = to_string(c.lambda_mode);
  j["dt"] = c.dt;
  j["steps"] = c.steps;
  j["particles"] = c.particles;
  if (c.method == Method::ClusterCBO) {
    j["clusters"] = c.clusters;
    j["alpha"] = number_or_inf(c.alpha);
  }
  j["init_lo"] = c.init_lo;
  j["init_hi"] = c.init_hi;
  if (c.init_center) j["init_center"] = vector_to_json(*c.init_center);
  j["seeds"] = c.seeds;
  j["snapshot_stride"] = c.snapshot_stride;
  j["detect_threshold"] = c.detect_threshold;
  return j;
}

RunConfig config_from_json_obj(const json& j) {
  RunConfig c;
  c.objective = j.at("objective").get<std::string>();
  c.dim = j.at("dim").get<int>();
  if (j.contains("shift")) c.shift = vector_from_json(j.at("shift"));
  if (j.contains("center_a")) c.center_a = vector_from_json(j.at("center_a"));
  if (j.contains("center_b")) c.center_b = vector_from_json(j.at("center_b"));
  c.method = method_from_string(j.at("method").get<std::string>());
  c.kernel = kernel_variant_from_string(j.at("kernel").get<std::string>());
  c.kappa = number_from(j.at("kappa"));
  c.beta0 = j.at("beta0").get<double>();
  c.beta_factor = j.at("beta_factor").get<double>();
  c.beta_max = number_from(j.at("beta_max"));
  c.sigma = j.at("sigma").get<double>();
  c.noise = noise_variant_from_string(j.at("noise").get<std::string>());
  if (j.contains("lambda_mode")) {
    c.lambda_mode =
        lambda_mode_from_string(j.at("lambda_mode").get<std::string>());
  }
  c.dt = j.at("dt").get<double>();
  c.steps = j.at("steps").get<int>();
  c.particles = j.at("particles").get<int>();
  if (j.contains("clusters")) c.clusters = j.at("clusters").get<int>();
  if (j.contains("alpha")) c.alpha = number_from(j.at("alpha"));
  c.init_lo = j.at("init_lo").get<double>();
  c.init_hi = j.at("init_hi").get<double>();
  if (j.contains("init_center")) {
    c.init_center = vector_from_json(j.at("init_center"));
  }
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.snapshot_stride = j.at("snapshot_stride").get<int>();
  c.detect_threshold = j.at("detect_threshold").get<double>();
  return c.normalized();
}

json seed_result_to_json(const SeedResult& r, const EmitOptions& opts) {
  json j;
  j["seed"] = r.seed;
  j["failed"] = r.failed;
  j["wall_seconds"] = opts.zero_timings ? 0.0 : r.wall_seconds;
  j["detected"] = r.detected;
  j["final_means"] = matrix_to_json(r.final_means);
  return j;
}

SeedResult seed_result_from_json(const json& j) {
  SeedResult r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.failed = j.at("failed").get<bool>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.detected = j.at("detected").get<std::vector<int>>();
  r.final_means = matrix_from_json(j.at("final_means"));
  return r;
}

json report_to_json_obj(const RunReport& r, const EmitOptions& opts) {
  json j;
  j["config"] = config_to_json_obj(r.config);
  json agg;
  agg["frac_ge1"] = r.frac_at_least[0];
  agg["frac_ge2"] = r.frac_at_least[1];
  agg["frac_ge3"] = r.frac_at_least[2];
  agg["failed"] = r.failed_count;
  agg["mean_wall_seconds"] = opts.zero_timings ? 0.0 : r.mean_wall_seconds;
  j["aggregate"] = std::move(agg);
  json seeds = json::array();
  for (const SeedResult& s : r.seeds) {
    seeds.push_back(seed_result_to_json(s, opts));
  }
  j["seeds"] = std::move(seeds);
  return j;
}

RunReport report_from_json_obj(const json& j) {
  RunReport r;
  r.config = config_from_json_obj(j.at("config"));
  const json& agg = j.at("aggregate");
  r.frac_at_least[0] = agg.at("frac_ge1").get<double>();
  r.frac_at_least[1] = agg.at("frac_ge2").get<double>();
  r.frac_at_least[2] = agg.at("frac_ge3").get<double>();
  r.failed_count = agg.at("failed").get<int>();
  r.mean_wall_seconds = agg.at("mean_wall_seconds").get<double>();
  for (const json& s : j.at("seeds")) {
    r.seeds.push_back(seed_result_from_json(s));
  }
  return r;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string csv_row(const RunReport& r, const EmitOptions& opts) {
  const RunConfig& c = r.config;
  std::ostringstream row;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(c)));
  row << hash << ',' << c.objective << ',' << to_string(c.method) << ','
      << to_string(c.kernel) << ',' << fmt6(c.kappa) << ',' << c.particles
      << ',' << c.clusters << ',' << fmt6(c.alpha) << ',' << fmt6(c.sigma)
      << ',' << c.seeds.size() << ',' << fmt6(r.frac_at_least[0]) << ','
      << fmt6(r.frac_at_least[1]) << ',' << fmt6(r.frac_at_least[2]) << ','
      << fmt6(opts.zero_timings ? 0.0 : r.mean_wall_seconds);
  return row.str();
}

constexpr const char* kCsvHeader =
    "config_hash,objective,method,kernel,kappa,particles,clusters,alpha,"
    "sigma,seed_count,frac_ge1,frac_ge2,frac_ge3,mean_wall_seconds";

}  // namespace

// ---- RunConfig ----------------------------------------------------------

RunConfig RunConfig::normalized() const {
  RunConfig c = *this;
  if (c.method != Method::ClusterCBO) {
    c.clusters = 0;
    c.alpha = 0.0;
  }
  if (!is_sampling_method(c.method)) c.lambda_mode = LambdaMode::Optimization;
  if (c.objective != "shifted-ackley") c.shift.reset();
  if (c.objective != "gaussian-mixture") {
    c.center_a.reset();
    c.center_b.reset();
  }
  return c;
}

bool RunConfig::operator==(const RunConfig& other) const {
  return objective == other.objective && dim == other.dim &&
         vectors_equal(shift, other.shift) &&
         vectors_equal(center_a, other.center_a) &&
         vectors_equal(center_b, other.center_b) && method == other.method &&
         kernel == other.kernel && kappa == other.kappa &&
         beta0 == other.beta0 && beta_factor == other.beta_factor &&
         beta_max == other.beta_max && sigma == other.sigma &&
         noise == other.noise && lambda_mode == other.lambda_mode &&
         dt == other.dt && steps == other.steps &&
         particles == other.particles && clusters == other.clusters &&
         alpha == other.alpha && init_lo == other.init_lo &&
         init_hi == other.init_hi &&
         vectors_equal(init_center, other.init_center) &&
         seeds == other.seeds &&
         snapshot_stride == other.snapshot_stride &&
         detect_threshold == other.detect_threshold;
}

Objective objective_for(const RunConfig& config) {
  ObjectiveParams params;
  params.dim = config.dim;
  params.shift = config.shift;
  params.center_a = config.center_a;
  params.center_b = config.center_b;
  return make_objective(config.objective, params);
}

StepperConfig stepper_for(const RunConfig& config) {
  StepperConfig sc;
  sc.method = config.method;
  sc.dt = config.dt;
  sc.noise = NoiseModel(config.noise, config.sigma);
  sc.lambda_mode = config.lambda_mode;
  sc.schedule = BetaSchedule(config.beta0, config.beta_factor,
                             std::isinf(config.beta_max) ? 1e300
                                                         : config.beta_max);
  sc.kernel = Kernel{config.kernel, config.kappa};
  sc.j_c = config.clusters;
  sc.alpha = config.alpha;
  return sc;
}

void validate(const RunConfig& config) {
  std::vector<std::string> problems;
  Objective obj;
  bool have_objective = false;
  try {
    obj = objective_for(config);
    have_objective = true;
  } catch (const std::exception& e) {
    problems.emplace_back(e.what());
  }
  if (have_objective && obj.dim != config.dim) {
    problems.push_back("objective dimension " + std::to_string(obj.dim) +
                       " does not match config dim " +
                       std::to_string(config.dim));
  }
  if (config.particles < 1) problems.push_back("particles must be >= 1");
  if (!(config.dt > 0.0)) problems.push_back("dt must be > 0");
  if (config.steps < 0) problems.push_back("steps must be >= 0");
  if (!(config.beta0 > 0.0)) problems.push_back("beta0 must be > 0");
  if (!(config.beta_factor >= 1.0)) problems.push_back("beta-factor must be >= 1");
  if (!(config.beta_max > 0.0)) problems.push_back("beta-max must be > 0");
  if (!(config.sigma >= 0.0)) problems.push_back("sigma must be >= 0");
  if (!(config.kappa > 0.0)) problems.push_back("kappa must be > 0 (or inf)");
  if (!(config.init_lo < config.init_hi)) {
    problems.push_back("init box must satisfy lo < hi");
  }
  if (config.init_center &&
      config.init_center->size() != config.dim) {
    problems.push_back("init-center dimension mismatch");
  }
  if (config.seeds.empty()) problems.push_back("seed list is empty");
  if (config.snapshot_stride < 1) problems.push_back("stride must be >= 1");
  if (!(config.detect_threshold > 0.0)) {
    problems.push_back("detect-threshold must be > 0");
  }
  if (config.method == Method::ClusterCBO) {
    if (config.clusters < 1) {
      problems.push_back("cluster-cbo requires clusters >= 1");
    } else if (config.clusters > config.particles) {
      problems.push_back("clusters must not exceed particles");
    }
    if (!(config.alpha >= 0.0)) problems.push_back("alpha must be >= 0");
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = config_to_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---- running ------------------------------------------------------------

bool SeedResult::operator==(const SeedResult& other) const {
  return seed == other.seed && failed == other.failed &&
         wall_seconds == other.wall_seconds && detected == other.detected &&
         final_means.rows() == other.final_means.rows() &&
         final_means.cols() == other.final_means.cols() &&
         final_means == other.final_means;
}

bool RunReport::operator==(const RunReport& other) const {
  return config == other.config && seeds == other.seeds &&
         failed_count == other.failed_count &&
         frac_at_least[0] == other.frac_at_least[0] &&
         frac_at_least[1] == other.frac_at_least[1] &&
         frac_at_least[2] == other.frac_at_least[2] &&
         mean_wall_seconds == other.mean_wall_seconds;
}

std::vector<int> detect_minima(const Matrix& final_means,
                               const std::vector<Vector>& minimizers,
                               double threshold) {
  if (minimizers.empty()) {
    throw std::invalid_argument("detect_minima: no minimizers given");
  }
  std::vector<int> detected;
  for (std::size_t z = 0; z < minimizers.size(); ++z) {
    for (Eigen::Index i = 0; i < final_means.rows(); ++i) {
      const double dist = (final_means.row(i) -
                           minimizers[z].transpose())
                              .cwiseAbs()
                              .maxCoeff();
      if (dist <= threshold) {
        detected.push_back(static_cast<int>(z));
        break;
      }
    }
  }
  return detected;
}

Ensemble initial_ensemble(const RunConfig& config, std::uint64_t seed) {
  RngStream init_rng(seed, kPositionInitStream);
  Ensemble start = init_uniform(config.particles, config.dim, config.init_lo,
                                config.init_hi, init_rng);
  if (config.init_center) {
    start.positions.rowwise() += config.init_center->transpose();
  }
  return start;
}

SeedResult run_single(const RunConfig& config, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SeedResult result;
  result.seed = seed;

  const Objective objective = objective_for(config);
  const Ensemble start = initial_ensemble(config, seed);
  const Trajectory traj = run(stepper_for(config), start, objective,
                              config.steps, seed, config.snapshot_stride);
  if (traj.failed) {
    result.failed = true;
  } else {
    result.final_means = traj.final_snapshot().means;
    if (!objective.minimizers.empty()) {
      result.detected = detect_minima(result.final_means,
                                      objective.minimizers,
                                      config.detect_threshold);
    }
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

namespace {

RunReport aggregate_report(const RunConfig& config,
                           std::vector<SeedResult> seed_results) {
  RunReport report;
  report.config = config.normalized();
  report.seeds = std::move(seed_results);
  int ok = 0;
  int counts[3] = {0, 0, 0};
  double wall = 0.0;
  for (const SeedResult& s : report.seeds) {
    wall += s.wall_seconds;
    if (s.failed) {
      ++report.failed_count;
      continue;
    }
    ++ok;
    const int n = static_cast<int>(s.detected.size());
    for (int k = 0; k < 3; ++k) {
      if (n >= k + 1) ++counts[k];
    }
  }
  for (int k = 0; k < 3; ++k) {
    report.frac_at_least[k] = ok > 0 ? static_cast<double>(counts[k]) / ok : 0.0;
  }
  report.mean_wall_seconds =
      report.seeds.empty() ? 0.0 : wall / report.seeds.size();
  return report;
}

}  // namespace

std::vector<RunReport> run_table(const std::vector<RunConfig>& configs,
                                 int jobs) {
  for (const RunConfig& c : configs) validate(c);

  struct Cell {
    int config_index;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    for (std::uint64_t seed : configs[ci].seeds) {
      cells.push_back({static_cast<int>(ci), seed});
    }
  }
  std::vector<SeedResult> results(cells.size());

  if (jobs <= 0) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
  }
  jobs = std::min<int>(jobs, static_cast<int>(cells.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> threw{false};
  std::string error_message;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size() || threw.load()) break;
      try {
        results[k] = run_single(configs[cells[k].config_index], cells[k].seed);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = e.what();
        threw.store(true);
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (threw.load()) {
    throw std::runtime_error("run_table: cell failed: " + error_message);
  }

  // Deterministic fold: cells were laid out in (config, seed) order.
  std::vector<RunReport> reports;
  reports.reserve(configs.size());
  std::size_t offset = 0;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const std::size_t n = configs[ci].seeds.size();
    std::vector<SeedResult> slice(results.begin() + offset,
                                  results.begin() + offset + n);
    offset += n;
    reports.push_back(aggregate_report(configs[ci], std::move(slice)));
  }
  return reports;
}

SamplingReport run_sampling(const RunConfig& config, const Objective& target,
                            int n_steps, std::uint64_t seed) {
  if (!is_sampling_method(config.method)) {
    throw std::invalid_argument("run_sampling: method must be a CBS variant");
  }
  if (config.lambda_mode != LambdaMode::Sampling) {
    throw std::invalid_argument("run_sampling: lambda mode must be sampling");
  }
  if (!target.minimizers.empty()) {
    throw std::invalid_argument(
        "run_sampling: target must be a sampling objective (no minimizers)");
  }
  if (target.modes.empty()) {
    throw std::invalid_argument("run_sampling: target has no mode centers");
  }
  const auto t0 = std::chrono::steady_clock::now();

  SamplingReport report;
  report.config = config.normalized();
  report.seed = seed;

  const Ensemble start = initial_ensemble(config, seed);
  const Trajectory traj =
      run(stepper_for(config), start, target, n_steps, seed,
          std::max(1, n_steps));
  if (traj.failed) {
    report.failed = true;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
  }
  report.final_ensemble = traj.final_snapshot().ensemble;

  // Nearest-mode partition of the final particles.
  const int n_modes = static_cast<int>(target.modes.size());
  std::vector<std::vector<int>> members(n_modes);
  for (int i = 0; i < report.final_ensemble.j_count(); ++i) {
    int best = 0;
    double best_dist = pos_inf;
    for (int z = 0; z < n_modes; ++z) {
      const double dist = (report.final_ensemble.positions.row(i) -
                           target.modes[z].transpose())
                              .squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = z;
      }
    }
    members[best].push_back(i);
  }
  for (int z = 0; z < n_modes; ++z) {
    ModeStat stat;
    stat.center = target.modes[z];
    stat.count = static_cast<int>(members[z].size());
    const int d = target.dim;
    if (stat.count < 2) {
      stat.degenerate = true;
      stat.mean = Vector::Zero(d);
      stat.covariance = Matrix::Zero(d, d);
      if (stat.count == 1) {
        stat.mean = report.final_ensemble.positions.row(members[z][0])
                        .transpose();
      }
    } else {
      Matrix pts(stat.count, d);
      for (int k = 0; k < stat.count; ++k) {
        pts.row(k) = report.final_ensemble.positions.row(members[z][k]);
      }
      const RowVector mean = pts.colwise().mean();
      stat.mean = mean.transpose();
      Matrix centered = pts.rowwise() - mean;
      stat.covariance =
          (centered.transpose() * centered) / (stat.count - 1.0);
    }
    report.modes.push_back(std::move(stat));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

// ---- emission -----------------------------------------------------------

EmitFormat emit_format_from_string(const std::string& name) {
  if (name == "csv") return EmitFormat::Csv;
  if (name == "json") return EmitFormat::Json;
  if (name == "markdown" || name == "markdown-table" || name == "md") {
    return EmitFormat::MarkdownTable;
  }
  throw std::invalid_argument("unknown format: " + name);
}

std::string render_results(const std::vector<RunReport>& reports,
                           EmitFormat format, const EmitOptions& opts) {
  std::ostringstream out;
  switch (format) {
    case EmitFormat::Csv: {
      out << kCsvHeader << '\n';
      for (const RunReport& r : reports) out << csv_row(r, opts) << '\n';
      break;
    }
    case EmitFormat::Json: {
      out << reports_to_json(reports, opts) << '\n';
      break;
    }
    case EmitFormat::MarkdownTable: {
      std::string header(kCsvHeader);
      std::replace(header.begin(), header.end(), ',', '|');
      out << '|' << header << "|\n|";
      for (int k = 0; k < 14; ++k) out << "---|";
      out << '\n';
      for (const RunReport& r : reports) {
        std::string row = csv_row(r, opts);
        std::replace(row.begin(), row.end(), ',', '|');
        out << '|' << row << "|\n";
      }
      break;
    }
  }
  return out.str();
}

void emit_results(const std::vector<RunReport>& reports, EmitFormat format,
                  const std::string& path, const EmitOptions& opts) {
  write_file(path, render_results(reports, format, opts));
}

std::string config_to_json(const RunConfig& config) {
  return config_to_json_obj(config).dump(2);
}

RunConfig config_from_json(const std::string& json_text) {
  return config_from_json_obj(json::parse(json_text));
}

std::string reports_to_json(const std::vector<RunReport>& reports,
                            const EmitOptions& opts) {
  json arr = json::array();
  for (const RunReport& r : reports) {
    arr.push_back(report_to_json_obj(r, opts));
  }
  return arr.dump(2);
}

std::vector<RunReport> reports_from_json(const std::string& json_text) {
  const json arr = json::parse(json_text);
  std::vector<RunReport> reports;
  for (const json& j : arr) reports.push_back(report_from_json_obj(j));
  return reports;
}

std::string sampling_report_to_json(const SamplingReport& report) {
  json j;
  j["config"] = config_to_json_obj(report.config);
  j["seed"] = report.seed;
  j["failed"] = report.failed;
  j["wall_seconds"] = report.wall_seconds;
  json modes = json::array();
  for (const ModeStat& m : report.modes) {
    json jm;
    jm["center"] = vector_to_json(m.center);
    jm["count"] = m.count;
    jm["degenerate"] = m.degenerate;
    jm["mean"] = vector_to_json(m.mean);
    jm["covariance"] = matrix_to_json(m.covariance);
    modes.push_back(std::move(jm));
  }
  j["modes"] = std::move(modes);
  j["final_positions"] = matrix_to_json(report.final_ensemble.positions);
  return j.dump(2);
}

std::string stationarity_report_to_json(const StationarityReport& report) {
  json j;
  j["n_samples"] = report.n_samples;
  j["beta"] = report.beta;
  json queries = json::array();
  for (const StationarityQueryStat& q : report.queries) {
    json jq;
    jq["query"] = vector_to_json(q.query);
    jq["empirical_mean"] = vector_to_json(q.empirical_mean);
    jq["oracle_mean"] = vector_to_json(q.oracle_mean);
    jq["standard_error"] = vector_to_json(q.standard_error);
    jq["empirical_cov"] = matrix_to_json(q.empirical_cov);
    jq["oracle_cov"] = matrix_to_json(q.oracle_cov);
    jq["cov_rel_error"] = q.cov_rel_error;
    jq["mean_within_band"] = q.mean_within_band;
    queries.push_back(std::move(jq));
  }
  j["queries"] = std::move(queries);
  return j.dump(2);
}

// ---- flat key-value config files -----------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    values.push_back(std::stod(trim(item)));
  }
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return v;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    seeds.push_back(std::stoull(trim(item)));
  }
  return seeds;
}

double parse_double(const std::string& text) {
  if (text == "inf") return pos_inf;
  return std::stod(text);
}

std::string format_vector(const Vector& v) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << fmt6(v[i]);
  }
  return out.str();
}

}  // namespace

RunConfig config_from_keyvalue(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "objective") c.objective = value;
    else if (key == "dim") c.dim = std::stoi(value);
    else if (key == "shift") c.shift = parse_vector(value);
    else if (key == "center-a") c.center_a = parse_vector(value);
    else if (key == "center-b") c.center_b = parse_vector(value);
    else if (key == "method") c.method = method_from_string(value);
    else if (key == "kernel") c.kernel = kernel_variant_from_string(value);
    else if (key == "kappa") c.kappa = parse_double(value);
    else if (key == "beta0") c.beta0 = parse_double(value);
    else if (key == "beta-factor") c.beta_factor = parse_double(value);
    else if (key == "beta-max") c.beta_max = parse_double(value);
    else if (key == "sigma") c.sigma = parse_double(value);
    else if (key == "noise") c.noise = noise_variant_from_string(value);
    else if (key == "lambda-mode") c.lambda_mode = lambda_mode_from_string(value);
    else if (key == "dt") c.dt = parse_double(value);
    else if (key == "steps") c.steps = std::stoi(value);
    else if (key == "particles") c.particles = std::stoi(value);
    else if (key == "clusters") c.clusters = std::stoi(value);
    else if (key == "alpha") c.alpha = parse_double(value);
    else if (key == "init-lo") c.init_lo = parse_double(value);
    else if (key == "init-hi") c.init_hi = parse_double(value);
    else if (key == "init-center") c.init_center = parse_vector(value);
    else if (key == "seeds") {
      const int n = std::stoi(value);
      c.seeds.clear();
      for (int s = 0; s < n; ++s) c.seeds.push_back(s);
    } else if (key == "seed-list") c.seeds = parse_seed_list(value);
    else if (key == "stride") c.snapshot_stride = std::stoi(value);
    else if (key == "detect-threshold") c.detect_threshold = parse_double(value);
    else {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  return c.normalized();
}

std::string config_to_keyvalue(const RunConfig& raw) {
  const RunConfig c = raw.normalized();
  std::ostringstream out;
  out << "objective = " << c.objective << '\n';
  out << "dim = " << c.dim << '\n';
  if (c.shift) out << "shift = " << format_vector(*c.shift) << '\n';
  if (c.center_a) out << "center-a = " << format_vector(*c.center_a) << '\n';
  if (c.center_b) out << "center-b = " << format_vector(*c.center_b) << '\n';
  out << "method = " << to_string(c.method) << '\n';
  out << "kernel = " << to_string(c.kernel) << '\n';
  out << "kappa = " << fmt6(c.kappa) << '\n';
  out << "beta0 = " << fmt6(c.beta0) << '\n';
  out << "beta-factor = " << fmt6(c.beta_factor) << '\n';
  out << "beta-max = " << fmt6(c.beta_max) << '\n';
  out << "sigma = " << fmt6(c.sigma) << '\n';
  out << "noise = " << to_string(c.noise) << '\n';
  if (is_sampling_method(c.method)) {
    out << "lambda-mode = " << to_string(c.lambda_mode) << '\n';
  }
  out << "dt = " << fmt6(c.dt) << '\n';
  out << "steps = " << c.steps << '\n';
  out << "particles = " << c.particles << '\n';
  if (c.method == Method::ClusterCBO) {
    out << "clusters = " << c.clusters << '\n';
    out << "alpha = " << fmt6(c.alpha) << '\n';
  }
  out << "init-lo = " << fmt6(c.init_lo) << '\n';
  out << "init-hi = " << fmt6(c.init_hi) << '\n';
  if (c.init_center) {
    out << "init-center = " << format_vector(*c.init_center) << '\n';
  }
  std::ostringstream seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    if (i) seeds << ',';
    seeds << c.seeds[i];
  }
  out << "seed-list = " << seeds.str() << '\n';
  out << "stride = " << c.snapshot_stride << '\n';
  out << "detect-threshold = " << fmt6(c.detect_threshold) << '\n';
  return out.str();
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_keyvalue(buffer.str());
}

void dump_trajectory_csv(const Trajectory& trajectory,
                         const std::string& path) {
  std::ostringstream out;
  if (trajectory.snapshots.empty()) {
    write_file(path, "time,beta,particle\n");
    return;
  }
  const int d = trajectory.snapshots.front().ensemble.dim();
  out << "time,beta,particle";
  for (int n = 0; n < d; ++n) out << ",x" << n;
  for (int n = 0; n < d; ++n) out << ",m" << n;
  out << '\n';
  for (const Snapshot& snap : trajectory.snapshots) {
    for (int i = 0; i < snap.ensemble.j_count(); ++i) {
      out << fmt6(snap.time) << ',' << fmt6(snap.beta) << ',' << i;
      for (int n = 0; n < d; ++n) {
        out << ',' << fmt6(snap.ensemble.positions(i, n));
      }
      for (int n = 0; n < d; ++n) out << ',' << fmt6(snap.means(i, n));
      out << '\n';
    }
  }
  write_file(path, out.str());
}

// ---- presets --------------------------------------------------------------

namespace {

RunConfig table1_base() {
  RunConfig c;
  c.objective = "multimodal-ackley";
  c.dim = 2;
  c.method = Method::PolarizedCBO;
  c.kernel = KernelVariant::Gaussian;
  c.beta0 = 1.0;
  c.beta_factor = 1.0;
  c.beta_max = 1.0;
  c.sigma = 1.0;
  c.noise = NoiseVariant::Isotropic;
  c.dt = 0.01;
  c.steps = 1000;
  c.snapshot_stride = 1000;
  return c;
}

RunConfig table2_base() {
  RunConfig c;
  c.objective = "multimodal-ackley";
  c.dim = 10;
  c.method = Method::ClusterCBO;
  c.kernel = KernelVariant::Gaussian;
  c.beta0 = 30.0;
  c.beta_factor = 1.01;
  c.beta_max = 1e7;
  c.sigma = 7.5;
  c.noise = NoiseVariant::Coordinatewise;
  c.dt = 0.01;
  c.steps = 1000;
  c.snapshot_stride = 1000;
  // The cluster count is not pinned by the desk-scale table definition;
  // 10 centers work well for J in the hundreds.
  c.clusters = 10;
  c.alpha = 5.0;
  return c;
}

}  // namespace

std::vector<RunConfig> preset(const std::string& name) {
  std::vector<RunConfig> configs;
  if (name == "table1" || name == "table1-cell") {
    const std::vector<int> j_values =
        name == "table1" ? std::vector<int>{25, 50, 100, 200}
                         : std::vector<int>{200};
    const std::vector<double> kappas =
        name == "table1" ? std::vector<double>{0.1, 0.5, 1.0}
                         : std::vector<double>{0.1};
    for (int j : j_values) {
      for (double kappa : kappas) {
        RunConfig c = table1_base();
        c.particles = j;
        c.kappa = kappa;
        configs.push_back(c.normalized());
      }
      RunConfig control = table1_base();
      control.particles = j;
      control.method = Method::StandardCBO;
      control.kernel = KernelVariant::Constant;
      control.kappa = pos_inf;
      configs.push_back(control.normalized());
    }
    return configs;
  }
  if (name == "table2" || name == "table2-cell") {
    const std::vector<int> j_values =
        name == "table2" ? std::vector<int>{50, 100, 200, 400}
                         : std::vector<int>{400};
    for (int j : j_values) {
      if (name == "table2") {
        for (double kappa : {1e-3, 1e-2, 1e-1}) {
          RunConfig c = table2_base();
          c.method = Method::PolarizedCBO;
          c.particles = j;
          c.kappa = kappa;
          configs.push_back(c.normalized());
        }
        RunConfig control = table2_base();
        control.method = Method::StandardCBO;
        control.kernel = KernelVariant::Constant;
        control.kappa = pos_inf;
        control.particles = j;
        configs.push_back(control.normalized());
      }
      const std::vector<double> cluster_kappas =
          name == "table2" ? std::vector<double>{1e-7, 0.1, pos_inf}
                           : std::vector<double>{0.1};
      for (double kappa : cluster_kappas) {
        RunConfig c = table2_base();
        c.particles = j;
        c.kappa = kappa;
        configs.push_back(c.normalized());
      }
    }
    return configs;
  }
  if (name == "table3") {
    for (int j : {200, 400, 800, 1600}) {
      for (double kappa : {1e-2, 1e-1, 1.0, 10.0, 100.0, pos_inf}) {
        RunConfig c = table2_base();
        c.dim = 30;
        c.particles = j;
        c.kappa = kappa;
        configs.push_back(c.normalized());
      }
    }
    return configs;
  }
  if (name == "ackley-unimodal") {
    RunConfig c;
    c.objective = "shifted-ackley";
    c.dim = 2;
    c.method = Method::PolarizedCBO;
    c.kernel = KernelVariant::Gaussian;
    c.kappa = 1.0;
    c.beta0 = c.beta_factor = 1.0;
    c.beta_max = 1.0;
    c.sigma = 1.0;
    c.noise = NoiseVariant::Isotropic;
    c.dt = 0.01;
    c.steps = 1000;
    c.particles = 100;
    c.snapshot_stride = 1000;
    // the init box translates with the shifted problem
    c.init_center = (Vector(2) << 3.0, 2.0).finished();
    configs.push_back(c.normalized());
    RunConfig control = c;
    control.method = Method::StandardCBO;
    control.kernel = KernelVariant::Constant;
    control.kappa = pos_inf;
    configs.push_back(control.normalized());
    return configs;
  }
  if (name == "sampling-far" || name == "sampling-close") {
    RunConfig c;
    c.objective = "gaussian-mixture";
    c.dim = 2;
    Vector a(2), b(2);
    if (name == "sampling-far") {
      a << 0.0, 2.0;
      b << 0.0, -2.0;
      c.kappa = 0.6;
    } else {
      a << 0.0, 1.0;
      b << 0.0, -1.0;
      c.kappa = 0.4;
    }
    c.center_a = a;
    c.center_b = b;
    c.method = Method::PolarizedCBS;
    c.kernel = KernelVariant::Gaussian;
    c.lambda_mode = LambdaMode::Sampling;
    c.beta0 = c.beta_factor = 1.0;
    c.beta_max = 1.0;
    c.sigma = 0.0;
    c.dt = 0.01;
    // long enough for standard CBS to fully collapse into one basin from
    // the default wide box
    c.steps = 8000;
    c.particles = 400;
    c.snapshot_stride = 8000;
    configs.push_back(c.normalized());
    RunConfig control = c;
    control.method = Method::StandardCBS;
    control.kernel = KernelVariant::Constant;
    control.kappa = pos_inf;
    configs.push_back(control.normalized());
    return configs;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"table1", "table1-cell", "table2",       "table2-cell",
          "table3", "ackley-unimodal", "sampling-far", "sampling-close"};
}

}  // namespace polarcbo
