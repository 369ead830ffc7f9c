#pragma once

#include <Eigen/Dense>

namespace shed {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(Eigen::Index parameter_count, AdamConfig config);

  AdamConfig config;
  long step_count = 0;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
};

enum class StepStatus { applied, rejected_non_finite };

/// Bias-corrected adaptive-moments update. A gradient containing NaN/Inf
/// leaves params and state untouched.
[[nodiscard]] StepStatus adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                                   AdamState& state);

}  // namespace shed
