#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "shed/rng.hpp"

namespace shed {

inline constexpr int kGridWidth = 9;
inline constexpr int kGridHeight = 9;
inline constexpr int kNumCells = kGridWidth * kGridHeight;
inline constexpr int kNumMoves = 4;
inline constexpr int kMaxTraps = 16;

enum class Move : int { north = 0, south = 1, east = 2, west = 3 };

/// x grows east, y grows south; (0,0) is the start corner.
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

inline constexpr Cell kStartCell{0, 0};
inline constexpr Cell kGoalCell{kGridWidth - 1, kGridHeight - 1};

constexpr int cell_index(Cell c) { return c.y * kGridWidth + c.x; }
constexpr Cell cell_at(int index) { return {index % kGridWidth, index / kGridWidth}; }

/// Intended move with boundary clipping.
Cell apply_move(Cell c, Move m);

/// A point in the design space [0,1]^3: slip, wind, trap density.
struct EnvParams {
  std::array<double, 3> theta{0.0, 0.0, 0.0};
  bool operator==(const EnvParams&) const = default;
};

/// Throws ConfigError if any component is outside [0,1] or non-finite.
void validate(const EnvParams& params);

struct GridEnv {
  static constexpr double step_cost = -0.05;
  static constexpr double trap_penalty = -1.0;
  static constexpr double goal_reward = 10.0;
  static constexpr int horizon = 60;
  static constexpr double discount = 0.99;

  EnvParams params;
  double p_slip = 0.0;
  double p_wind = 0.0;
  std::vector<Cell> traps;  // sorted by cell index
  std::array<bool, kNumCells> trap_mask{};
  std::uint64_t layout_seed = 0;

  bool is_trap(Cell c) const { return trap_mask[cell_index(c)]; }
  /// Reward for arriving at `next`.
  double arrival_reward(Cell next) const;
};

std::uint64_t layout_seed_for(const EnvParams& params);

GridEnv build_env(const EnvParams& params);

/// Same slip and wind as `params`, trap cells copied from `layout`.
GridEnv build_env_with_layout(const EnvParams& params, const GridEnv& layout);

struct EnvOutcome {
  Cell next_cell;
  double reward = 0.0;
  bool done = false;
};

/// One transition. Stream order per call: slip uniform, slip direction (only
/// when slipping), wind uniform. `elapsed_steps` counts steps already taken in
/// the episode; the outcome is done when the goal is reached or this step
/// exhausts the horizon.
EnvOutcome env_step(const GridEnv& env, Cell cell, Move action, RandomStream& stream,
                    int elapsed_steps = 0);

/// Exact P(s'|s,a) with the goal absorbing at zero reward.
struct TransitionKernel {
  std::vector<double> prob;             // [s][a][s'], kNumCells*kNumMoves*kNumCells
  std::vector<double> expected_reward;  // [s][a]

  double p(int s, int a, int next) const { return prob[(s * kNumMoves + a) * kNumCells + next]; }
  double r(int s, int a) const { return expected_reward[s * kNumMoves + a]; }
};

TransitionKernel transition_kernel(const GridEnv& env);

/// Row-stochastic tabular policy: row = cell index, column = move.
using PolicyMatrix = Eigen::Matrix<double, kNumCells, kNumMoves, Eigen::RowMajor>;

PolicyMatrix uniform_policy();
PolicyMatrix deterministic_policy(const std::array<int, kNumCells>& moves);

struct ValueSolution {
  Eigen::VectorXd values;  // discounted V*, goal = 0
  std::array<int, kNumCells> greedy{};
  double start_value = 0.0;
  int sweeps = 0;

  PolicyMatrix policy() const { return deterministic_policy(greedy); }
};

/// Discounted value iteration to a sup-norm change below 1e-10. Greedy ties go
/// to the lowest move index.
ValueSolution value_iteration(const GridEnv& env);
ValueSolution value_iteration(const TransitionKernel& kernel);

/// Exact discounted V^pi via a linear solve of (I - gamma P_pi) V = r_pi.
Eigen::VectorXd evaluate_policy(const TransitionKernel& kernel, const PolicyMatrix& policy);

/// Exact expected undiscounted return over `horizon` steps from every cell.
Eigen::VectorXd expected_finite_return(const TransitionKernel& kernel, const PolicyMatrix& policy,
                                       int horizon = GridEnv::horizon);

/// V*(start) - V^pi(start), both exact and discounted.
double regret(const GridEnv& env, const PolicyMatrix& policy);

nlohmann::json to_json(const GridEnv& env);

}  // namespace shed
