#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "shed/config.hpp"
#include "shed/eval_set.hpp"
#include "shed/student.hpp"

namespace shed {

/// Held-out environments with uniformly random parameters. Only exposes an
/// aggregate evaluation so nothing on the training or observation path can
/// read it; every evaluation is counted.
class TestSet {
 public:
  TestSet(int n, std::uint64_t seed);

  /// Mean normalized greedy return over all test environments.
  double evaluate(const StudentPolicy& pi, std::uint64_t eval_seed, int episodes);

  long evaluations() const { return evaluations_; }
  /// Hex digest of the quantized parameters; equal across runs sharing the set.
  const std::string& id() const { return id_; }
  nlohmann::json manifest() const;

 private:
  EvalSet set_;
  std::string id_;
  long evaluations_ = 0;
};

struct RunSummary {
  Mode mode = Mode::shed;
  std::uint64_t seed = 0;
  bool completed = false;
  int environments_generated = 0;
  int transition_rows = 0;
  long test_evaluations = 0;
  double final_test = 0.0;
  std::string test_set_id;
  std::uint64_t teacher_hash_start = 0;
  std::uint64_t teacher_hash_end = 0;
  long substitutions = 0;
  std::size_t real_transitions = 0;
  std::size_t synthetic_transitions = 0;
  std::string error;

  nlohmann::json to_json() const;
};

/// The hierarchical loop for modes shed, hmdp (psi forced to 1, no
/// diffusion) and dr (uniform teacher, no learning). Writes
/// config.resolved.json, eval_set.json, test_set.json, training_log.csv,
/// run_manifest.json and checkpoints into `out`. A NumericError mid-run
/// leaves a PARTIAL marker and is rethrown.
RunSummary run_curriculum(const RunConfig& config, const std::filesystem::path& out);
RunSummary run_shed(const RunConfig& config, const std::filesystem::path& out);
RunSummary run_baseline_dr(const RunConfig& config, const std::filesystem::path& out);

struct SuiteRow {
  Mode mode = Mode::shed;
  int n_seeds = 0;
  int n_failed = 0;
  double mean_final_test = 0.0;
  double stderr_final_test = 0.0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<RunSummary> runs;
  std::string test_set_id;
  bool trend_holds = false;
  std::string trend_report;
};

/// Every mode in config.suite_modes for seeds config.seed .. config.seed + n - 1,
/// one directory per cell, plus summary.csv and summary.json.
SuiteResult run_suite(const RunConfig& config, int n_seeds, const std::filesystem::path& out);

/// Standard error with the n - 1 sample deviation; zero for n < 2.
double standard_error(const std::vector<double>& values);

struct DistributionRow {
  double noise_scale = 0.0;
  int dim = 0;
  double real_mean = 0.0;
  double syn_mean = 0.0;
  double real_std = 0.0;
  double syn_std = 0.0;
  double energy_distance = 0.0;
};

struct SmallNoiseRow {
  int pair = 0;
  int dim = 0;
  double true_next = 0.0;
  double syn_next = 0.0;
  double abs_error = 0.0;
};

struct ValidationResult {
  std::vector<DistributionRow> rows;
  std::vector<int> real_counts;  // per noise scale
  std::vector<int> syn_counts;
  std::vector<SmallNoiseRow> small_noise;
  double small_noise_max_error = 0.0;
  double synthetic_reward_mae = 0.0;
  double distribution_seconds = 0.0;
  double small_noise_seconds = 0.0;
};

/// Surrogate experiment: for each noise scale, train the conditional model on
/// surrogate triples and compare real vs synthetic next states at one held-out
/// (s, a); then the small-noise accuracy sweep. Writes diffusion_val.csv,
/// diffusion_samples.csv, diffusion_small_noise.csv and validation_summary.json.
ValidationResult run_validate_diffusion(const RunConfig& config, const std::filesystem::path& out);

/// Two-sample energy distance 2E|X-Y| - E|X-X'| - E|Y-Y'| in one dimension.
double energy_distance(const std::vector<double>& x, const std::vector<double>& y);

struct ProbeRow {
  int probe = 0;
  EnvParams theta;
  ContinuityProbe result;
};

/// Continuity probes of the value-iteration policy at `theta`, dims 0 and 1,
/// plus `random_probes` random base points; writes continuity.csv.
std::vector<ProbeRow> run_continuity_probes(const EnvParams& theta, const std::vector<double>& deltas,
                                            int random_probes, std::uint64_t seed,
                                            const std::filesystem::path& out);

}  // namespace shed
