#ifndef POLARCBO_HARNESS_HPP
#define POLARCBO_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polarcbo/diagnostics.hpp"
#include "polarcbo/dynamics.hpp"
#include "polarcbo/objectives.hpp"

namespace polarcbo {

/// Full description of one experiment: objective, method, kernel, noise,
/// schedule, particle counts, seed sweep. Every field lands in the
/// serialized report so results carry their provenance.
struct RunConfig {
  std::string objective = "ackley";
  int dim = 2;
  std::optional<Vector> shift;     // shifted-ackley only
  std::optional<Vector> center_a;  // gaussian-mixture only
  std::optional<Vector> center_b;  // gaussian-mixture only

  Method method = Method::StandardCBO;
  KernelVariant kernel = KernelVariant::Constant;
  double kappa = pos_inf;

  double beta0 = 1.0;
  double beta_factor = 1.0;
  double beta_max = 1.0;

  double sigma = 1.0;
  NoiseVariant noise = NoiseVariant::Isotropic;
  LambdaMode lambda_mode = LambdaMode::Optimization;  // CBS methods only

  double dt = 0.01;
  int steps = 1000;
  int particles = 100;
  int clusters = 0;    // ClusterCBO only
  double alpha = 0.0;  // ClusterCBO only

  double init_lo = -3.0;
  double init_hi = 3.0;
  /// Optional translation of the init box: particles start in
  /// init_center + [init_lo, init_hi]^d. Unset means the origin.
  std::optional<Vector> init_center;

  std::vector<std::uint64_t> seeds = {0, 1,  2,  3,  4,  5,  6,  7,  8,  9,
                                      10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  int snapshot_stride = 1000;
  double detect_threshold = 0.25;

  /// Resets fields that do not apply to the chosen method/objective to
  /// their defaults, so serialization and comparison see one canonical
  /// representation.
  RunConfig normalized() const;

  bool operator==(const RunConfig& other) const;
};

/// Throws std::invalid_argument describing every inconsistency
/// (dimension mismatches, missing method-specific fields, empty seeds).
void validate(const RunConfig& config);

Objective objective_for(const RunConfig& config);
StepperConfig stepper_for(const RunConfig& config);

/// Stable 64-bit FNV-1a hash of the canonical serialized config.
std::uint64_t config_hash(const RunConfig& config);

struct SeedResult {
  std::uint64_t seed = 0;
  bool failed = false;
  double wall_seconds = 0.0;
  Matrix final_means;         // empty when failed
  std::vector<int> detected;  // sorted minimizer indices

  bool operator==(const SeedResult& other) const;
};

struct RunReport {
  RunConfig config;
  std::vector<SeedResult> seeds;
  int failed_count = 0;
  /// Fraction of non-failed seeds that detected at least 1, 2, 3 minima.
  double frac_at_least[3] = {0.0, 0.0, 0.0};
  double mean_wall_seconds = 0.0;

  bool operator==(const RunReport& other) const;
};

/// Minimizer z counts as detected iff some row m of final_means satisfies
/// max_n |m_n - z_n| <= threshold. Returns sorted minimizer indices.
std::vector<int> detect_minima(const Matrix& final_means,
                               const std::vector<Vector>& minimizers,
                               double threshold = 0.25);

/// Box draw for one seed (stream kPositionInitStream of that seed).
Ensemble initial_ensemble(const RunConfig& config, std::uint64_t seed);

/// One (config, seed) cell: init box draw, dynamics run, detection on the
/// final-iterate means.
SeedResult run_single(const RunConfig& config, std::uint64_t seed);

/// Runs every (config, seed) cell, up to `jobs` concurrently, and folds
/// the aggregates deterministically in (config, seed) order. Failed runs
/// are excluded from success counts and reported via failed_count.
std::vector<RunReport> run_table(const std::vector<RunConfig>& configs,
                                 int jobs = 0);

struct ModeStat {
  Vector center;
  int count = 0;
  Vector mean;
  Matrix covariance;
  bool degenerate = false;  // fewer than 2 particles in this mode
};

struct SamplingReport {
  RunConfig config;
  std::uint64_t seed = 0;
  bool failed = false;
  double wall_seconds = 0.0;
  Ensemble final_ensemble;
  std::vector<ModeStat> modes;  // nearest-mode partition statistics
};

/// CBS run against a sampling target (empty minimizers, nonempty modes);
/// partitions the final particles by nearest mode center.
SamplingReport run_sampling(const RunConfig& config, const Objective& target,
                            int n_steps, std::uint64_t seed);

enum class EmitFormat { Csv, Json, MarkdownTable };

struct EmitOptions {
  /// Zeroes wall-time fields, for byte-comparing reruns of a pipeline
  /// (wall time is the one legitimately nondeterministic field).
  bool zero_timings = false;
};

EmitFormat emit_format_from_string(const std::string& name);

/// Byte-stable serialization: sorted keys, 6 significant digits in the
/// tabular formats, full round-trip precision in JSON.
void emit_results(const std::vector<RunReport>& reports, EmitFormat format,
                  const std::string& path, const EmitOptions& opts = {});

std::string render_results(const std::vector<RunReport>& reports,
                           EmitFormat format, const EmitOptions& opts = {});

// JSON round-trip surface (also used by the CLI for config files).
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& json_text);
std::string reports_to_json(const std::vector<RunReport>& reports,
                            const EmitOptions& opts = {});
std::vector<RunReport> reports_from_json(const std::string& json_text);
std::string sampling_report_to_json(const SamplingReport& report);
std::string stationarity_report_to_json(const StationarityReport& report);

/// Flat key-value config documents (lines of `key = value`, '#' comments);
/// keys mirror the CLI flags.
RunConfig config_from_keyvalue(const std::string& text);
std::string config_to_keyvalue(const RunConfig& config);
RunConfig load_config_file(const std::string& path);

/// Thinned trajectory snapshots as CSV for external plotting.
void dump_trajectory_csv(const Trajectory& trajectory,
                         const std::string& path);

/// Named experiment bundles shipping the desk-scale table cells and the
/// sampling setups; `table3` is the opt-in long-running d=30 sweep.
std::vector<RunConfig> preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace polarcbo

#endif
