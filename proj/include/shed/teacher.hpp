#pragma once

#include <filesystem>
#include <span>

#include "shed/adam.hpp"
#include "shed/eval_set.hpp"
#include "shed/gridnav.hpp"
#include "shed/mlp.hpp"
#include "shed/replay.hpp"
#include "shed/rng.hpp"

namespace shed {

struct TeacherConfig {
  int hidden = 64;
  double tau = 0.005;
  double gamma = 0.95;
  double sigma_expl = 0.1;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  // When false every transition bootstraps, including the last of a budget.
  bool terminal_at_budget = false;
};

struct UpdateDiagnostics {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  bool critic_applied = false;
  bool actor_applied = false;
};

/// Deterministic-policy-gradient teacher. State: performance vector of length
/// m. Action: environment parameters in [0,1]^3 (sigmoid-squashed actor).
class TeacherAgent {
 public:
  TeacherAgent(int m, const TeacherConfig& config, RandomStream& init);

  int state_dim() const { return m_; }
  const TeacherConfig& config() const { return config_; }

  EnvParams select_action(const PerfVector& s, bool explore, RandomStream& stream) const;

  /// Critic regression step, actor ascent step, then soft target updates.
  UpdateDiagnostics ddpg_update(std::span<const TeacherTransition> batch);

  /// One optimizer step on the mean-squared Bellman error; returns the loss
  /// before the step. Non-finite losses skip the step.
  double critic_update(std::span<const TeacherTransition> batch, bool* applied = nullptr);
  /// One optimizer step ascending mean Q(s, actor(s)); returns the objective
  /// before the step.
  double actor_update(std::span<const TeacherTransition> batch, bool* applied = nullptr);
  /// target <- (1 - tau) * target + tau * online for both networks.
  void soft_update(double tau);

  double critic_value(const PerfVector& s, const EnvParams& a) const;

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }
  const AdamState& actor_optimizer() const { return actor_opt_; }
  const AdamState& critic_optimizer() const { return critic_opt_; }

  std::uint64_t parameter_hash() const;

  void save(const std::filesystem::path& stem) const;
  void load(const std::filesystem::path& stem);

 private:
  Eigen::MatrixXd critic_inputs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;

  int m_;
  TeacherConfig config_;
  Mlp actor_, critic_, target_actor_, target_critic_;
  AdamState actor_opt_, critic_opt_;
};

}  // namespace shed
