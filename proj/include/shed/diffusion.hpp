#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shed/adam.hpp"
#include "shed/mlp.hpp"
#include "shed/replay.hpp"
#include "shed/rng.hpp"

namespace shed {

/// Variance-preserving schedule with K steps. Vectors are indexed k - 1.
struct NoiseSchedule {
  int K = 0;
  double beta_min = 0.1;
  double beta_max = 10.0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  double beta_at(int k) const { return beta[k - 1]; }
  double alpha_at(int k) const { return alpha[k - 1]; }
  double alpha_bar_at(int k) const { return alpha_bar[k - 1]; }
};

/// beta_k = 1 - exp(beta_min / K - 0.5 (beta_max - beta_min) (2k - 1) / K^2).
NoiseSchedule build_schedule(int K, double beta_min = 0.1, double beta_max = 10.0);

inline constexpr int kTimeEmbeddingDim = 16;

/// Sinusoidal features of k / K.
Eigen::VectorXd timestep_embedding(int k, int K);

struct Diffused {
  Eigen::VectorXd x_k;
  Eigen::VectorXd eps;
};

/// x_k = sqrt(alpha_bar_k) x0 + sqrt(1 - alpha_bar_k) eps.
Diffused forward_diffuse(const NoiseSchedule& schedule, const Eigen::VectorXd& x0, int k,
                         RandomStream& stream);
/// Same with the noise supplied by the caller.
Diffused forward_diffuse(const NoiseSchedule& schedule, const Eigen::VectorXd& x0, int k,
                         const Eigen::VectorXd& eps);

struct DiffusionConfig {
  int K = 10;
  int hidden = 128;
  double learning_rate = 1e-3;
};

/// Noise-prediction model eps(x_k, cond, k) over a target living in [0,1]^d.
/// Targets and conditions are mapped affinely to [-1,1] internally; samples
/// are mapped back and clamped to [0,1].
class ConditionalDiffusion {
 public:
  ConditionalDiffusion(int target_dim, int cond_dim, const DiffusionConfig& config, RandomStream& init);

  int target_dim() const { return target_dim_; }
  int cond_dim() const { return cond_dim_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  long steps_trained() const { return optimizer_.step_count; }
  bool trained() const { return steps_trained() > 0; }
  double learning_rate() const { return optimizer_.config.learning_rate; }
  void set_learning_rate(double lr) { optimizer_.config.learning_rate = lr; }

  /// Network input [x_k ; standardized cond ; embedding(k)] per column.
  Eigen::MatrixXd network_input(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& cond,
                                const std::vector<int>& k) const;

  /// Mean over the batch of ||eps - eps_hat||^2 before the optimizer step.
  /// Columns are samples; targets and conditions in their natural [0,1] units.
  /// Non-finite losses skip the step.
  double train_step(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& conds, RandomStream& stream,
                    bool* applied = nullptr);

  /// Reverse chain from N(0, I); no noise is added at k = 1. When
  /// `trajectory` is given it receives x_K, ..., x_0 in standardized units.
  Eigen::MatrixXd sample(const Eigen::MatrixXd& conds, RandomStream& stream,
                         std::vector<Eigen::MatrixXd>* trajectory = nullptr) const;

  void save(const std::filesystem::path& stem) const;
  void load(const std::filesystem::path& stem);

 private:
  int target_dim_;
  int cond_dim_;
  DiffusionConfig config_;
  NoiseSchedule schedule_;
  Mlp net_;
  AdamState optimizer_;
};

/// p(s' | s, a): target = next performance vector, condition = [s ; a].
class TransitionDiffusion {
 public:
  TransitionDiffusion(int m, const DiffusionConfig& config, RandomStream& init)
      : m_(m), model_(m, m + 3, config, init) {}

  int state_dim() const { return m_; }
  ConditionalDiffusion& model() { return model_; }
  const ConditionalDiffusion& model() const { return model_; }

  static Eigen::VectorXd condition(const PerfVector& s, const EnvParams& a);

 private:
  int m_;
  ConditionalDiffusion model_;
};

/// Behavior-cloning variant: p(a | s).
class ActionDiffusion {
 public:
  ActionDiffusion(int m, const DiffusionConfig& config, RandomStream& init)
      : m_(m), model_(3, m, config, init) {}

  int state_dim() const { return m_; }
  ConditionalDiffusion& model() { return model_; }
  const ConditionalDiffusion& model() const { return model_; }

 private:
  int m_;
  ConditionalDiffusion model_;
};

double train_step(TransitionDiffusion& model, std::span<const TeacherTransition> batch,
                  RandomStream& stream);
double train_action_model(ActionDiffusion& model, std::span<const TeacherTransition> batch,
                          RandomStream& stream);

PerfVector sample_next_state(const TransitionDiffusion& model, const PerfVector& s, const EnvParams& a,
                             RandomStream& stream);
EnvParams sample_action(const ActionDiffusion& model, const PerfVector& s, RandomStream& stream);

enum class ActionSource { random, action_model };

using RewardFn = std::function<double(const PerfVector&, const EnvParams&, const PerfVector&)>;

/// n synthetic transitions: s from the real buffer, a uniform (or from the
/// action model), s' from the reverse chain, r recomputed with `reward`.
std::vector<TeacherTransition> generate_synthetic_batch(const TransitionDiffusion& model,
                                                        const ReplayBuffer& real, int n,
                                                        const RewardFn& reward, RandomStream& stream,
                                                        ActionSource source = ActionSource::random,
                                                        const ActionDiffusion* action_model = nullptr);

}  // namespace shed
