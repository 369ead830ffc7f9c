#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "shed/diffusion.hpp"
#include "shed/eval_set.hpp"
#include "shed/reward.hpp"
#include "shed/student.hpp"
#include "shed/teacher.hpp"

namespace shed {

enum class Mode { shed, hmdp, dr, validate_diffusion };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct TeacherRunConfig {
  TeacherConfig agent;
  int batch_size = 64;
  int updates_per_step = 10;
  // Real transitions required before the first teacher update.
  int warmup = 32;
  std::size_t replay_capacity = ReplayBuffer::kDefaultCapacity;
};

struct DiffusionRunConfig {
  DiffusionConfig model;
  int batch_size = 128;
  int train_steps_per_teacher_step = 100;
  // Real transitions required before the diffusion model trains.
  int min_real = 256;
  int synthetic_per_step = 64;
  ActionSource action_source = ActionSource::random;
};

struct ValidationConfig {
  int state_dim = 5;
  int train_samples = 5000;
  int train_steps = 20000;
  int batch_size = 256;
  // Cosine decay of the learning rate down to this fraction over train_steps.
  double final_lr_fraction = 0.02;
  int samples = 200;
  std::vector<double> noise_scales{1.0, 3.0, 10.0};
  double base_sigma = 0.05;
  double small_noise_scale = 0.05;
  int small_noise_pairs = 10;
  int surrogate_hidden = 32;
  std::uint64_t surrogate_seed = 4242;
};

struct RunConfig {
  Mode mode = Mode::shed;
  std::uint64_t seed = 0;
  int K_episodes = 20;
  int T_budget = 30;
  int m = 10;
  double psi = 0.5;
  double eta = 0.1;
  long C = 5000;
  RewardMode reward_mode = RewardMode::l1;

  int eval_episodes = kDefaultEvalEpisodes;
  std::uint64_t eval_set_seed = 1001;
  EvalSampling eval_sampling = EvalSampling::latin_hypercube;
  std::uint64_t test_set_seed = 2002;
  int test_envs = 10;
  int test_every = 5;
  bool dump_qtable = false;

  StudentConfig student;
  TeacherRunConfig teacher;
  DiffusionRunConfig diffusion;
  ValidationConfig validation;
  std::vector<Mode> suite_modes{Mode::dr, Mode::hmdp, Mode::shed};
  std::string out_dir = "runs";
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);
void validate(const RunConfig& config);

}  // namespace shed
