#pragma once

#include "shed/eval_set.hpp"
#include "shed/gridnav.hpp"

namespace shed {

inline constexpr double kCvCap = 10.0;

enum class RewardMode {
  l1,                  // ||s - s'||_1 - eta * cv
  signed_improvement,  // sum_i (s'_i - s_i) - eta * cv
};

/// Coefficient of variation of the per-environment changes w_i = s'_i - s_i:
/// sqrt(1/(m-1) * sum_i (w_i - mean)^2 / mean^2). Zero when no component
/// moves, capped at 10, and set to the cap when the mean change is ~0.
double compute_cv(const PerfVector& s, const PerfVector& s_next);

/// The action does not enter the formula.
double compute_reward(const PerfVector& s, const EnvParams& a, const PerfVector& s_next, double eta,
                      RewardMode mode = RewardMode::l1);

}  // namespace shed
