#include "shed/teacher.hpp"

#include <algorithm>
#include <cmath>

#include "shed/checkpoint.hpp"
#include "shed/errors.hpp"

namespace shed {

namespace {

struct BatchMatrices {
  Eigen::MatrixXd s, a, s_next;
  Eigen::VectorXd r, continuing;
};

BatchMatrices to_matrices(std::span<const TeacherTransition> batch, int m, bool terminal_at_budget) {
  if (batch.empty()) throw ConfigError("teacher update: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  BatchMatrices b{Eigen::MatrixXd(m, n), Eigen::MatrixXd(3, n), Eigen::MatrixXd(m, n),
                  Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = batch[j];
    if (t.s.size() != m || t.s_next.size() != m) throw ConfigError("teacher update: state length mismatch");
    b.s.col(j) = t.s;
    b.s_next.col(j) = t.s_next;
    for (int d = 0; d < 3; ++d) b.a(d, j) = t.a.theta[d];
    b.r[j] = t.r;
    b.continuing[j] = terminal_at_budget && t.terminal ? 0.0 : 1.0;
  }
  return b;
}

}  // namespace

TeacherAgent::TeacherAgent(int m, const TeacherConfig& config, RandomStream& init)
    : m_(m), config_(config) {
  if (m < 1) throw ConfigError("TeacherAgent: m must be positive");
  const int h = config.hidden;
  actor_ = Mlp::glorot({m, h, h, 3}, Activation::tanh, Activation::sigmoid, init);
  critic_ = Mlp::glorot({m + 3, h, h, 1}, Activation::tanh, Activation::identity, init);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = AdamState(actor_.parameter_count(), {.learning_rate = config.actor_lr});
  critic_opt_ = AdamState(critic_.parameter_count(), {.learning_rate = config.critic_lr});
}

EnvParams TeacherAgent::select_action(const PerfVector& s, bool explore, RandomStream& stream) const {
  const Eigen::VectorXd out = actor_.forward(s);
  EnvParams a;
  for (int d = 0; d < 3; ++d) {
    double v = out[d];
    if (explore) v += config_.sigma_expl * stream.gaussian();
    a.theta[d] = std::clamp(v, 0.0, 1.0);
  }
  return a;
}

Eigen::MatrixXd TeacherAgent::critic_inputs(const Eigen::MatrixXd& states,
                                            const Eigen::MatrixXd& actions) const {
  Eigen::MatrixXd x(m_ + 3, states.cols());
  x.topRows(m_) = states;
  x.bottomRows(3) = actions;
  return x;
}

double TeacherAgent::critic_value(const PerfVector& s, const EnvParams& a) const {
  Eigen::VectorXd x(m_ + 3);
  x.head(m_) = s;
  x.tail(3) = Eigen::Vector3d(a.theta[0], a.theta[1], a.theta[2]);
  return critic_.forward(x)[0];
}

double TeacherAgent::critic_update(std::span<const TeacherTransition> batch, bool* applied) {
  const BatchMatrices b = to_matrices(batch, m_, config_.terminal_at_budget);
  const double n = static_cast<double>(b.r.size());

  const Eigen::MatrixXd next_actions = target_actor_.forward_batch(b.s_next);
  const Eigen::RowVectorXd next_q = target_critic_.forward_batch(critic_inputs(b.s_next, next_actions));
  const Eigen::RowVectorXd y =
      b.r.transpose() + config_.gamma * next_q.cwiseProduct(b.continuing.transpose());

  MlpCache cache;
  const Eigen::RowVectorXd q = critic_.forward_batch(critic_inputs(b.s, b.a), &cache);
  const Eigen::RowVectorXd err = q - y;
  const double loss = err.squaredNorm() / n;
  bool ok = false;
  if (std::isfinite(loss)) {
    const Eigen::VectorXd grads = critic_.backward(cache, 2.0 * err / n);
    ok = adam_step(critic_.parameters(), grads, critic_opt_) == StepStatus::applied;
  }
  if (applied) *applied = ok;
  return loss;
}

double TeacherAgent::actor_update(std::span<const TeacherTransition> batch, bool* applied) {
  const BatchMatrices b = to_matrices(batch, m_, config_.terminal_at_budget);
  const double n = static_cast<double>(b.r.size());

  MlpCache actor_cache, critic_cache;
  const Eigen::MatrixXd actions = actor_.forward_batch(b.s, &actor_cache);
  const Eigen::RowVectorXd q = critic_.forward_batch(critic_inputs(b.s, actions), &critic_cache);
  const double objective = q.sum() / n;
  bool ok = false;
  if (std::isfinite(objective)) {
    Eigen::MatrixXd input_grad;
    critic_.backward(critic_cache, Eigen::RowVectorXd::Constant(q.size(), 1.0 / n), &input_grad);
    // Minimize -Q: the actor's upstream is -dQ/da.
    const Eigen::MatrixXd upstream = -input_grad.bottomRows(3);
    const Eigen::VectorXd grads = actor_.backward(actor_cache, upstream);
    ok = adam_step(actor_.parameters(), grads, actor_opt_) == StepStatus::applied;
  }
  if (applied) *applied = ok;
  return objective;
}

void TeacherAgent::soft_update(double tau) {
  target_actor_.parameters() = (1.0 - tau) * target_actor_.parameters() + tau * actor_.parameters();
  target_critic_.parameters() = (1.0 - tau) * target_critic_.parameters() + tau * critic_.parameters();
}

UpdateDiagnostics TeacherAgent::ddpg_update(std::span<const TeacherTransition> batch) {
  UpdateDiagnostics d;
  d.critic_loss = critic_update(batch, &d.critic_applied);
  d.actor_objective = actor_update(batch, &d.actor_applied);
  soft_update(config_.tau);
  if (!actor_.all_finite() || !critic_.all_finite())
    throw NumericError("ddpg_update: teacher parameters became non-finite");
  return d;
}

std::uint64_t TeacherAgent::parameter_hash() const {
  std::uint64_t h = 0;
  for (const Mlp* net : {&actor_, &critic_, &target_actor_, &target_critic_})
    h = combine_seed(h, net->parameter_hash());
  return h;
}

void TeacherAgent::save(const std::filesystem::path& stem) const {
  Checkpoint ck;
  ck.meta()["kind"] = "teacher";
  ck.meta()["m"] = m_;
  ck.meta()["hidden"] = config_.hidden;
  ck.add_mlp("actor", actor_);
  ck.add_mlp("critic", critic_);
  ck.add_mlp("target_actor", target_actor_);
  ck.add_mlp("target_critic", target_critic_);
  ck.add_adam("actor_opt", actor_opt_);
  ck.add_adam("critic_opt", critic_opt_);
  ck.write(stem);
}

void TeacherAgent::load(const std::filesystem::path& stem) {
  const Checkpoint ck = Checkpoint::read(stem);
  if (ck.meta().value("kind", "") != "teacher" || ck.meta().value("m", -1) != m_ ||
      ck.meta().value("hidden", -1) != config_.hidden)
    throw ConfigError("TeacherAgent::load: checkpoint does not match this agent");
  ck.load_mlp("actor", actor_);
  ck.load_mlp("critic", critic_);
  ck.load_mlp("target_actor", target_actor_);
  ck.load_mlp("target_critic", target_critic_);
  ck.load_adam("actor_opt", actor_opt_);
  ck.load_adam("critic_opt", critic_opt_);
}

}  // namespace shed
