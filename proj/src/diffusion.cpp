#include "shed/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shed/checkpoint.hpp"
#include "shed/errors.hpp"

namespace shed {

NoiseSchedule build_schedule(int K, double beta_min, double beta_max) {
  if (K < 2) throw ConfigError("build_schedule: K must be >= 2");
  NoiseSchedule s;
  s.K = K;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  double running = 1.0;
  const double kk = static_cast<double>(K);
  for (int k = 1; k <= K; ++k) {
    const double exponent = beta_min / kk - 0.5 * (beta_max - beta_min) * (2.0 * k - 1.0) / (kk * kk);
    const double beta = 1.0 - std::exp(exponent);
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("build_schedule: beta outside (0,1)");
    s.beta.push_back(beta);
    s.alpha.push_back(1.0 - beta);
    running *= 1.0 - beta;
    s.alpha_bar.push_back(running);
  }
  return s;
}

Eigen::VectorXd timestep_embedding(int k, int K) {
  const double t = static_cast<double>(k) / K;
  Eigen::VectorXd e(kTimeEmbeddingDim);
  for (int j = 0; j < kTimeEmbeddingDim / 2; ++j) {
    const double freq = 0.5 * std::numbers::pi * std::ldexp(1.0, j);
    e[2 * j] = std::sin(freq * t);
    e[2 * j + 1] = std::cos(freq * t);
  }
  return e;
}

Diffused forward_diffuse(const NoiseSchedule& schedule, const Eigen::VectorXd& x0, int k,
                         const Eigen::VectorXd& eps) {
  if (k < 1 || k > schedule.K) throw ConfigError("forward_diffuse: k outside 1..K");
  if (eps.size() != x0.size()) throw ConfigError("forward_diffuse: noise length mismatch");
  const double ab = schedule.alpha_bar_at(k);
  return {std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps, eps};
}

Diffused forward_diffuse(const NoiseSchedule& schedule, const Eigen::VectorXd& x0, int k,
                         RandomStream& stream) {
  return forward_diffuse(schedule, x0, k, sample_gaussian(stream, static_cast<int>(x0.size())));
}

ConditionalDiffusion::ConditionalDiffusion(int target_dim, int cond_dim, const DiffusionConfig& config,
                                           RandomStream& init)
    : target_dim_(target_dim), cond_dim_(cond_dim), config_(config), schedule_(build_schedule(config.K)) {
  if (target_dim < 1 || cond_dim < 0) throw ConfigError("ConditionalDiffusion: bad dimensions");
  const int in = target_dim + cond_dim + kTimeEmbeddingDim;
  net_ = Mlp::glorot({in, config.hidden, config.hidden, target_dim}, Activation::tanh,
                     Activation::identity, init);
  // Output layer starts at zero so the untrained model predicts no noise.
  const int last = net_.num_layers() - 1;
  net_.weight(last).setZero();
  net_.bias(last).setZero();
  optimizer_ = AdamState(net_.parameter_count(), {.learning_rate = config.learning_rate});
}

Eigen::MatrixXd ConditionalDiffusion::network_input(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& cond,
                                                    const std::vector<int>& k) const {
  const auto n = x_k.cols();
  if (x_k.rows() != target_dim_ || cond.rows() != cond_dim_ || cond.cols() != n ||
      static_cast<Eigen::Index>(k.size()) != n)
    throw ConfigError("ConditionalDiffusion: input shape mismatch");
  Eigen::MatrixXd in(target_dim_ + cond_dim_ + kTimeEmbeddingDim, n);
  in.topRows(target_dim_) = x_k;
  in.middleRows(target_dim_, cond_dim_) = (2.0 * cond.array() - 1.0).matrix();
  for (Eigen::Index j = 0; j < n; ++j)
    in.col(j).tail(kTimeEmbeddingDim) = timestep_embedding(k[j], schedule_.K);
  return in;
}

double ConditionalDiffusion::train_step(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& conds,
                                        RandomStream& stream, bool* applied) {
  const auto n = targets.cols();
  if (n == 0) throw ConfigError("train_step: empty batch");
  if (targets.rows() != target_dim_) throw ConfigError("train_step: target dimension mismatch");

  std::vector<int> ks(n);
  Eigen::MatrixXd eps(target_dim_, n);
  Eigen::MatrixXd x_k(target_dim_, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    ks[j] = 1 + static_cast<int>(stream.uniform_index(schedule_.K));
    for (int d = 0; d < target_dim_; ++d) eps(d, j) = stream.gaussian();
    const double ab = schedule_.alpha_bar_at(ks[j]);
    x_k.col(j) = std::sqrt(ab) * (2.0 * targets.col(j).array() - 1.0).matrix() + std::sqrt(1.0 - ab) * eps.col(j);
  }

  MlpCache cache;
  const Eigen::MatrixXd pred = net_.forward_batch(network_input(x_k, conds, ks), &cache);
  const Eigen::MatrixXd err = pred - eps;
  const double loss = err.squaredNorm() / static_cast<double>(n);
  bool ok = false;
  if (std::isfinite(loss)) {
    const Eigen::VectorXd grads = net_.backward(cache, 2.0 * err / static_cast<double>(n));
    ok = adam_step(net_.parameters(), grads, optimizer_) == StepStatus::applied;
  }
  if (applied) *applied = ok;
  return loss;
}

Eigen::MatrixXd ConditionalDiffusion::sample(const Eigen::MatrixXd& conds, RandomStream& stream,
                                             std::vector<Eigen::MatrixXd>* trajectory) const {
  const auto n = conds.cols();
  Eigen::MatrixXd x(target_dim_, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (int d = 0; d < target_dim_; ++d) x(d, j) = stream.gaussian();
  if (trajectory) trajectory->assign(1, x);

  for (int k = schedule_.K; k >= 1; --k) {
    const std::vector<int> ks(n, k);
    const Eigen::MatrixXd eps_hat = net_.forward_batch(network_input(x, conds, ks));
    const double a = schedule_.alpha_at(k);
    const double b = schedule_.beta_at(k);
    const double ab = schedule_.alpha_bar_at(k);
    x = x / std::sqrt(a) - (b / std::sqrt(a * (1.0 - ab))) * eps_hat;
    if (k > 1) {
      const double sigma = std::sqrt(b);
      for (Eigen::Index j = 0; j < n; ++j)
        for (int d = 0; d < target_dim_; ++d) x(d, j) += sigma * stream.gaussian();
    }
    if (trajectory) trajectory->push_back(x);
  }
  return ((x.array() + 1.0) * 0.5).cwiseMax(0.0).cwiseMin(1.0).matrix();
}

void ConditionalDiffusion::save(const std::filesystem::path& stem) const {
  Checkpoint ck;
  ck.meta()["kind"] = "diffusion";
  ck.meta()["target_dim"] = target_dim_;
  ck.meta()["cond_dim"] = cond_dim_;
  ck.meta()["K"] = schedule_.K;
  ck.meta()["hidden"] = config_.hidden;
  ck.add_mlp("eps_model", net_);
  ck.add_adam("eps_opt", optimizer_);
  ck.write(stem);
}

void ConditionalDiffusion::load(const std::filesystem::path& stem) {
  const Checkpoint ck = Checkpoint::read(stem);
  const auto& meta = ck.meta();
  if (meta.value("kind", "") != "diffusion" || meta.value("target_dim", -1) != target_dim_ ||
      meta.value("cond_dim", -1) != cond_dim_ || meta.value("K", -1) != schedule_.K ||
      meta.value("hidden", -1) != config_.hidden)
    throw ConfigError("ConditionalDiffusion::load: checkpoint does not match this model");
  ck.load_mlp("eps_model", net_);
  ck.load_adam("eps_opt", optimizer_);
}

Eigen::VectorXd TransitionDiffusion::condition(const PerfVector& s, const EnvParams& a) {
  Eigen::VectorXd c(s.size() + 3);
  c.head(s.size()) = s;
  c.tail(3) = Eigen::Vector3d(a.theta[0], a.theta[1], a.theta[2]);
  return c;
}

double train_step(TransitionDiffusion& model, std::span<const TeacherTransition> batch,
                  RandomStream& stream) {
  const int m = model.state_dim();
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd targets(m, n), conds(m + 3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    targets.col(j) = batch[j].s_next;
    conds.col(j) = TransitionDiffusion::condition(batch[j].s, batch[j].a);
  }
  return model.model().train_step(targets, conds, stream);
}

double train_action_model(ActionDiffusion& model, std::span<const TeacherTransition> batch,
                          RandomStream& stream) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd targets(3, n), conds(model.state_dim(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    targets.col(j) = Eigen::Vector3d(batch[j].a.theta[0], batch[j].a.theta[1], batch[j].a.theta[2]);
    conds.col(j) = batch[j].s;
  }
  return model.model().train_step(targets, conds, stream);
}

PerfVector sample_next_state(const TransitionDiffusion& model, const PerfVector& s, const EnvParams& a,
                             RandomStream& stream) {
  return model.model().sample(TransitionDiffusion::condition(s, a), stream).col(0);
}

EnvParams sample_action(const ActionDiffusion& model, const PerfVector& s, RandomStream& stream) {
  const Eigen::VectorXd v = model.model().sample(s, stream).col(0);
  return {{v[0], v[1], v[2]}};
}

std::vector<TeacherTransition> generate_synthetic_batch(const TransitionDiffusion& model,
                                                        const ReplayBuffer& real, int n,
                                                        const RewardFn& reward, RandomStream& stream,
                                                        ActionSource source,
                                                        const ActionDiffusion* action_model) {
  if (n < 0) throw ConfigError("generate_synthetic_batch: n must be >= 0");
  if (n == 0) return {};
  if (!model.model().trained()) throw ConfigError("generate_synthetic_batch: transition model is untrained");
  if (real.empty()) throw ConfigError("generate_synthetic_batch: real buffer is empty");
  if (source == ActionSource::action_model && (!action_model || !action_model->model().trained()))
    throw ConfigError("generate_synthetic_batch: action model missing or untrained");

  const int m = model.state_dim();
  Eigen::MatrixXd states(m, n);
  for (int j = 0; j < n; ++j) states.col(j) = real.sample(stream).s;

  Eigen::MatrixXd actions(3, n);
  if (source == ActionSource::random) {
    for (int j = 0; j < n; ++j)
      for (int d = 0; d < 3; ++d) actions(d, j) = stream.uniform();
  } else {
    actions = action_model->model().sample(states, stream);
  }

  Eigen::MatrixXd conds(m + 3, n);
  conds.topRows(m) = states;
  conds.bottomRows(3) = actions;
  const Eigen::MatrixXd next = model.model().sample(conds, stream);

  std::vector<TeacherTransition> out;
  out.reserve(n);
  for (int j = 0; j < n; ++j) {
    TeacherTransition t;
    t.s = states.col(j);
    t.a = {{actions(0, j), actions(1, j), actions(2, j)}};
    t.s_next = next.col(j);
    t.r = reward(t.s, t.a, t.s_next);
    t.origin = Origin::synthetic;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace shed
