#include "shed/adam.hpp"

#include <cmath>

#include "shed/errors.hpp"

namespace shed {

AdamState::AdamState(Eigen::Index parameter_count, AdamConfig cfg)
    : config(cfg),
      first_moment(Eigen::VectorXd::Zero(parameter_count)),
      second_moment(Eigen::VectorXd::Zero(parameter_count)) {
  if (!(cfg.learning_rate > 0.0) || !(cfg.beta1 > 0.0) || !(cfg.beta2 > 0.0) || !(cfg.epsilon > 0.0))
    throw ConfigError("AdamState: hyperparameters must be positive");
}

StepStatus adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw ConfigError("adam_step: parameter, gradient and moment shapes differ");
  if (!grads.allFinite()) return StepStatus::rejected_non_finite;

  const auto& c = state.config;
  ++state.step_count;
  state.first_moment = c.beta1 * state.first_moment + (1.0 - c.beta1) * grads;
  state.second_moment = c.beta2 * state.second_moment + (1.0 - c.beta2) * grads.cwiseAbs2();
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  params.array() -= c.learning_rate * (state.first_moment.array() / correction1) /
                    ((state.second_moment.array() / correction2).sqrt() + c.epsilon);
  return StepStatus::applied;
}

}  // namespace shed
