#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "shed/gridnav.hpp"
#include "shed/rng.hpp"

namespace shed {

inline constexpr double kReturnLow = -10.0;
inline constexpr double kReturnHigh = 10.0;
// |goal_reward| / (1 - gamma) plus slack.
inline constexpr double kQBound = 1100.0;

struct StudentConfig {
  double learning_rate = 0.2;
  double epsilon = 0.15;
};

using QTable = Eigen::Matrix<double, kNumCells, kNumMoves, Eigen::RowMajor>;

/// Tabular Q-learning agent. The exploration stream drives epsilon-greedy
/// choices only; environment randomness comes from the caller's stream.
struct StudentPolicy {
  QTable q = QTable::Zero();
  double learning_rate = 0.2;
  double epsilon = 0.15;
  static constexpr double discount = GridEnv::discount;
  RandomStream exploration;

  /// Argmax per cell, ties to the lowest move index.
  std::array<int, kNumCells> greedy_moves() const;
  PolicyMatrix greedy_policy() const { return deterministic_policy(greedy_moves()); }
};

StudentPolicy init_student(std::uint64_t seed, const StudentConfig& config = {});

struct TrainOptions {
  /// When set, epsilon decays linearly from the policy's epsilon to this value
  /// over the step budget.
  std::optional<double> anneal_epsilon_to;
};

/// Exactly `steps` one-step Q-learning transitions, starting a fresh episode
/// and resetting on goal or horizon. Throws NumericError if the table leaves
/// the assertion bound.
void train_student(StudentPolicy& pi, const GridEnv& env, long steps, RandomStream& stream,
                   const TrainOptions& options = {});

double normalize_return(double mean_return);

/// Mean undiscounted return of a deterministic move table over greedy rollouts.
double mean_greedy_return(const std::array<int, kNumCells>& moves, const GridEnv& env, int episodes,
                          RandomStream& stream);

/// Normalized greedy performance in [0,1].
double evaluate_performance(const StudentPolicy& pi, const GridEnv& env, int episodes,
                            RandomStream& stream);
double evaluate_performance(const std::array<int, kNumCells>& moves, const GridEnv& env,
                            int episodes, RandomStream& stream);

/// Normalized performance from the exact expected undiscounted horizon return.
double exact_performance(const PolicyMatrix& policy, const GridEnv& env);

double regret(const GridEnv& env, const StudentPolicy& pi);

void write_q_table_csv(const StudentPolicy& pi, const std::string& path);

}  // namespace shed
