#include "shed/config.hpp"

#include <fstream>
#include <set>

#include "shed/errors.hpp"

namespace shed {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::shed: return "shed";
    case Mode::hmdp: return "hmdp";
    case Mode::dr: return "dr";
    case Mode::validate_diffusion: return "validate_diffusion";
  }
  return "?";
}

Mode mode_from_string(const std::string& name) {
  if (name == "shed") return Mode::shed;
  if (name == "hmdp") return Mode::hmdp;
  if (name == "dr") return Mode::dr;
  if (name == "validate_diffusion" || name == "validate-diffusion") return Mode::validate_diffusion;
  throw ConfigError("unknown mode '" + name + "'");
}

namespace {

// Reads known keys from one JSON object and rejects whatever is left over.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: bad value for '" + qualified(key) + "': " + e.what());
    }
  }

  template <typename F>
  void get_with(const char* key, F&& parse) {
    seen_.insert(key);
    if (j_.contains(key)) parse(j_.at(key), qualified(key));
  }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("config: unknown key '" + qualified(key) + "'");
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string as_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config: '" + key + "' must be a string");
  return v.get<std::string>();
}

RewardMode reward_mode_from(const std::string& s) {
  if (s == "l1") return RewardMode::l1;
  if (s == "signed_improvement") return RewardMode::signed_improvement;
  throw ConfigError("config: reward_mode must be l1 or signed_improvement");
}

EvalSampling sampling_from(const std::string& s) {
  if (s == "latin_hypercube") return EvalSampling::latin_hypercube;
  if (s == "random") return EvalSampling::random;
  throw ConfigError("config: eval_sampling must be latin_hypercube or random");
}

ActionSource action_source_from(const std::string& s) {
  if (s == "random") return ActionSource::random;
  if (s == "action_model") return ActionSource::action_model;
  throw ConfigError("config: action_source must be random or action_model");
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  ObjectReader r(j, "");
  r.get_with("mode", [&](const nlohmann::json& v, const std::string& k) { c.mode = mode_from_string(as_string(v, k)); });
  r.get("seed", c.seed);
  r.get("K_episodes", c.K_episodes);
  r.get("T_budget", c.T_budget);
  r.get("m", c.m);
  r.get("psi", c.psi);
  r.get("eta", c.eta);
  r.get("C", c.C);
  r.get_with("reward_mode", [&](const nlohmann::json& v, const std::string& k) { c.reward_mode = reward_mode_from(as_string(v, k)); });
  r.get("eval_episodes", c.eval_episodes);
  r.get("eval_set_seed", c.eval_set_seed);
  r.get_with("eval_sampling", [&](const nlohmann::json& v, const std::string& k) { c.eval_sampling = sampling_from(as_string(v, k)); });
  r.get("test_set_seed", c.test_set_seed);
  r.get("test_envs", c.test_envs);
  r.get("test_every", c.test_every);
  r.get("dump_qtable", c.dump_qtable);
  r.get("out_dir", c.out_dir);
  r.get_with("suite_modes", [&](const nlohmann::json& v, const std::string& k) {
    if (!v.is_array()) throw ConfigError("config: '" + k + "' must be an array");
    c.suite_modes.clear();
    for (const auto& e : v) c.suite_modes.push_back(mode_from_string(as_string(e, k)));
  });

  if (const auto* s = r.child("student")) {
    ObjectReader sr(*s, "student");
    sr.get("learning_rate", c.student.learning_rate);
    sr.get("epsilon", c.student.epsilon);
    sr.finish();
  }
  if (const auto* t = r.child("teacher")) {
    ObjectReader tr(*t, "teacher");
    tr.get("hidden", c.teacher.agent.hidden);
    tr.get("tau", c.teacher.agent.tau);
    tr.get("gamma", c.teacher.agent.gamma);
    tr.get("sigma_expl", c.teacher.agent.sigma_expl);
    tr.get("actor_lr", c.teacher.agent.actor_lr);
    tr.get("critic_lr", c.teacher.agent.critic_lr);
    tr.get("terminal_at_budget", c.teacher.agent.terminal_at_budget);
    tr.get("batch_size", c.teacher.batch_size);
    tr.get("updates_per_step", c.teacher.updates_per_step);
    tr.get("warmup", c.teacher.warmup);
    tr.get("replay_capacity", c.teacher.replay_capacity);
    tr.finish();
  }
  if (const auto* d = r.child("diffusion")) {
    ObjectReader dr(*d, "diffusion");
    dr.get("K_diffusion", c.diffusion.model.K);
    dr.get("hidden", c.diffusion.model.hidden);
    dr.get("learning_rate", c.diffusion.model.learning_rate);
    dr.get("batch_size", c.diffusion.batch_size);
    dr.get("train_steps_per_teacher_step", c.diffusion.train_steps_per_teacher_step);
    dr.get("min_real", c.diffusion.min_real);
    dr.get("synthetic_per_step", c.diffusion.synthetic_per_step);
    dr.get_with("action_source", [&](const nlohmann::json& v, const std::string& k) {
      c.diffusion.action_source = action_source_from(as_string(v, k));
    });
    dr.finish();
  }
  if (const auto* v = r.child("validation")) {
    ObjectReader vr(*v, "validation");
    vr.get("state_dim", c.validation.state_dim);
    vr.get("train_samples", c.validation.train_samples);
    vr.get("train_steps", c.validation.train_steps);
    vr.get("batch_size", c.validation.batch_size);
    vr.get("final_lr_fraction", c.validation.final_lr_fraction);
    vr.get("samples", c.validation.samples);
    vr.get("noise_scales", c.validation.noise_scales);
    vr.get("base_sigma", c.validation.base_sigma);
    vr.get("small_noise_scale", c.validation.small_noise_scale);
    vr.get("small_noise_pairs", c.validation.small_noise_pairs);
    vr.get("surrogate_hidden", c.validation.surrogate_hidden);
    vr.get("surrogate_seed", c.validation.surrogate_seed);
    vr.finish();
  }
  r.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json modes = nlohmann::json::array();
  for (Mode m : c.suite_modes) modes.push_back(to_string(m));
  return {
      {"mode", to_string(c.mode)},
      {"seed", c.seed},
      {"K_episodes", c.K_episodes},
      {"T_budget", c.T_budget},
      {"m", c.m},
      {"psi", c.psi},
      {"eta", c.eta},
      {"C", c.C},
      {"reward_mode", c.reward_mode == RewardMode::l1 ? "l1" : "signed_improvement"},
      {"eval_episodes", c.eval_episodes},
      {"eval_set_seed", c.eval_set_seed},
      {"eval_sampling", c.eval_sampling == EvalSampling::latin_hypercube ? "latin_hypercube" : "random"},
      {"test_set_seed", c.test_set_seed},
      {"test_envs", c.test_envs},
      {"test_every", c.test_every},
      {"dump_qtable", c.dump_qtable},
      {"out_dir", c.out_dir},
      {"suite_modes", modes},
      {"student", {{"learning_rate", c.student.learning_rate}, {"epsilon", c.student.epsilon}}},
      {"teacher",
       {{"hidden", c.teacher.agent.hidden},
        {"tau", c.teacher.agent.tau},
        {"gamma", c.teacher.agent.gamma},
        {"sigma_expl", c.teacher.agent.sigma_expl},
        {"actor_lr", c.teacher.agent.actor_lr},
        {"critic_lr", c.teacher.agent.critic_lr},
        {"terminal_at_budget", c.teacher.agent.terminal_at_budget},
        {"batch_size", c.teacher.batch_size},
        {"updates_per_step", c.teacher.updates_per_step},
        {"warmup", c.teacher.warmup},
        {"replay_capacity", c.teacher.replay_capacity}}},
      {"diffusion",
       {{"K_diffusion", c.diffusion.model.K},
        {"hidden", c.diffusion.model.hidden},
        {"learning_rate", c.diffusion.model.learning_rate},
        {"batch_size", c.diffusion.batch_size},
        {"train_steps_per_teacher_step", c.diffusion.train_steps_per_teacher_step},
        {"min_real", c.diffusion.min_real},
        {"synthetic_per_step", c.diffusion.synthetic_per_step},
        {"action_source", c.diffusion.action_source == ActionSource::random ? "random" : "action_model"}}},
      {"validation",
       {{"state_dim", c.validation.state_dim},
        {"train_samples", c.validation.train_samples},
        {"train_steps", c.validation.train_steps},
        {"batch_size", c.validation.batch_size},
        {"final_lr_fraction", c.validation.final_lr_fraction},
        {"samples", c.validation.samples},
        {"noise_scales", c.validation.noise_scales},
        {"base_sigma", c.validation.base_sigma},
        {"small_noise_scale", c.validation.small_noise_scale},
        {"small_noise_pairs", c.validation.small_noise_pairs},
        {"surrogate_hidden", c.validation.surrogate_hidden},
        {"surrogate_seed", c.validation.surrogate_seed}}},
  };
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(c.K_episodes >= 1, "K_episodes must be >= 1");
  require(c.T_budget >= 0, "T_budget must be >= 0");
  require(c.m >= 2, "m must be >= 2");
  require(c.psi >= 0.0 && c.psi <= 1.0, "psi must be in [0,1]");
  require(c.eta >= 0.0, "eta must be >= 0");
  require(c.C >= 1, "C must be >= 1");
  require(c.eval_episodes >= 1, "eval_episodes must be >= 1");
  require(c.test_envs >= 2, "test_envs must be >= 2");
  require(c.test_every >= 1, "test_every must be >= 1");
  require(c.test_set_seed != c.eval_set_seed, "test_set_seed must differ from eval_set_seed");
  require(c.student.learning_rate > 0.0, "student.learning_rate must be > 0");
  require(c.student.epsilon >= 0.0 && c.student.epsilon <= 1.0, "student.epsilon must be in [0,1]");
  require(c.teacher.agent.hidden >= 1, "teacher.hidden must be >= 1");
  require(c.teacher.agent.tau > 0.0 && c.teacher.agent.tau <= 1.0, "teacher.tau must be in (0,1]");
  require(c.teacher.agent.gamma >= 0.0 && c.teacher.agent.gamma < 1.0, "teacher.gamma must be in [0,1)");
  require(c.teacher.agent.sigma_expl >= 0.0, "teacher.sigma_expl must be >= 0");
  require(c.teacher.agent.actor_lr > 0.0 && c.teacher.agent.critic_lr > 0.0, "teacher learning rates must be > 0");
  require(c.teacher.batch_size >= 1, "teacher.batch_size must be >= 1");
  require(c.teacher.updates_per_step >= 0, "teacher.updates_per_step must be >= 0");
  require(c.teacher.warmup >= 1, "teacher.warmup must be >= 1");
  require(c.teacher.replay_capacity >= 1, "teacher.replay_capacity must be >= 1");
  require(c.diffusion.model.K >= 2, "diffusion.K_diffusion must be >= 2");
  require(c.diffusion.model.hidden >= 1, "diffusion.hidden must be >= 1");
  require(c.diffusion.model.learning_rate > 0.0, "diffusion.learning_rate must be > 0");
  require(c.diffusion.batch_size >= 1, "diffusion.batch_size must be >= 1");
  require(c.diffusion.train_steps_per_teacher_step >= 0, "diffusion.train_steps_per_teacher_step must be >= 0");
  require(c.diffusion.min_real >= 1, "diffusion.min_real must be >= 1");
  require(c.diffusion.synthetic_per_step >= 0, "diffusion.synthetic_per_step must be >= 0");
  require(c.validation.state_dim >= 2, "validation.state_dim must be >= 2");
  require(c.validation.train_samples >= 1 && c.validation.train_steps >= 1, "validation sizes must be >= 1");
  require(c.validation.batch_size >= 1 && c.validation.samples >= 2, "validation batch/sample sizes too small");
  require(c.validation.final_lr_fraction > 0.0 && c.validation.final_lr_fraction <= 1.0,
          "validation.final_lr_fraction must be in (0,1]");
  require(!c.validation.noise_scales.empty(), "validation.noise_scales must not be empty");
  for (double s : c.validation.noise_scales) require(s >= 0.0, "validation.noise_scales must be >= 0");
  require(c.validation.base_sigma > 0.0 && c.validation.small_noise_scale >= 0.0, "validation noise must be >= 0");
  require(c.validation.small_noise_pairs >= 1, "validation.small_noise_pairs must be >= 1");
  require(!c.suite_modes.empty(), "suite_modes must not be empty");
  for (Mode m : c.suite_modes) require(m != Mode::validate_diffusion, "suite_modes may only contain shed, hmdp, dr");
}

}  // namespace shed
