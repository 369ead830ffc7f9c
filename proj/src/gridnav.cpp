#include "shed/gridnav.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shed/errors.hpp"

namespace shed {

Cell apply_move(Cell c, Move m) {
  switch (m) {
    case Move::north: c.y = std::max(0, c.y - 1); break;
    case Move::south: c.y = std::min(kGridHeight - 1, c.y + 1); break;
    case Move::east: c.x = std::min(kGridWidth - 1, c.x + 1); break;
    case Move::west: c.x = std::max(0, c.x - 1); break;
  }
  return c;
}

void validate(const EnvParams& params) {
  for (std::size_t i = 0; i < params.theta.size(); ++i) {
    const double v = params.theta[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ConfigError("EnvParams: theta[" + std::to_string(i) + "] = " + std::to_string(v) +
                        " outside [0,1]");
  }
}

double GridEnv::arrival_reward(Cell next) const {
  if (next == kGoalCell) return step_cost + goal_reward;
  if (is_trap(next)) return step_cost + trap_penalty;
  return step_cost;
}

std::uint64_t layout_seed_for(const EnvParams& params) {
  std::uint64_t seed = 0x5eedf00dULL;
  for (double v : params.theta)
    seed = combine_seed(seed, static_cast<std::uint64_t>(std::llround(v * 1e6)));
  return seed;
}

namespace {

GridEnv env_without_traps(const EnvParams& params) {
  validate(params);
  GridEnv env;
  env.params = params;
  env.p_slip = 0.4 * params.theta[0];
  env.p_wind = 0.4 * params.theta[1];
  env.layout_seed = layout_seed_for(params);
  return env;
}

}  // namespace

GridEnv build_env(const EnvParams& params) {
  GridEnv env = env_without_traps(params);
  const int n_traps = static_cast<int>(std::lround(kMaxTraps * params.theta[2]));

  std::vector<int> candidates;
  for (int s = 0; s < kNumCells; ++s)
    if (cell_at(s) != kStartCell && cell_at(s) != kGoalCell) candidates.push_back(s);

  // Partial Fisher-Yates: the first n_traps slots are a uniform draw without replacement.
  RandomStream stream(env.layout_seed);
  for (int i = 0; i < n_traps; ++i) {
    const auto j = i + static_cast<int>(stream.uniform_index(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  std::vector<int> chosen(candidates.begin(), candidates.begin() + n_traps);
  std::sort(chosen.begin(), chosen.end());
  for (int s : chosen) {
    env.traps.push_back(cell_at(s));
    env.trap_mask[s] = true;
  }
  return env;
}

GridEnv build_env_with_layout(const EnvParams& params, const GridEnv& layout) {
  GridEnv env = env_without_traps(params);
  env.traps = layout.traps;
  env.trap_mask = layout.trap_mask;
  env.layout_seed = layout.layout_seed;
  return env;
}

EnvOutcome env_step(const GridEnv& env, Cell cell, Move action, RandomStream& stream,
                    int elapsed_steps) {
  if (elapsed_steps >= GridEnv::horizon) throw ConfigError("env_step: episode budget exhausted");
  Move move = action;
  if (stream.uniform() < env.p_slip) move = static_cast<Move>(stream.uniform_index(kNumMoves));
  Cell next = apply_move(cell, move);
  if (stream.uniform() < env.p_wind) next = apply_move(next, Move::east);

  EnvOutcome out;
  out.next_cell = next;
  out.reward = env.arrival_reward(next);
  out.done = next == kGoalCell || elapsed_steps + 1 >= GridEnv::horizon;
  return out;
}

TransitionKernel transition_kernel(const GridEnv& env) {
  TransitionKernel k;
  k.prob.assign(static_cast<std::size_t>(kNumCells) * kNumMoves * kNumCells, 0.0);
  k.expected_reward.assign(static_cast<std::size_t>(kNumCells) * kNumMoves, 0.0);
  const int goal = cell_index(kGoalCell);

  for (int s = 0; s < kNumCells; ++s) {
    for (int a = 0; a < kNumMoves; ++a) {
      double* row = &k.prob[(s * kNumMoves + a) * kNumCells];
      if (s == goal) {
        row[goal] = 1.0;
        continue;
      }
      // Effective move distribution after slip.
      std::array<double, kNumMoves> move_p{};
      for (int m = 0; m < kNumMoves; ++m) move_p[m] = env.p_slip / kNumMoves;
      move_p[a] += 1.0 - env.p_slip;
      for (int m = 0; m < kNumMoves; ++m) {
        if (move_p[m] == 0.0) continue;
        const Cell moved = apply_move(cell_at(s), static_cast<Move>(m));
        const Cell blown = apply_move(moved, Move::east);
        row[cell_index(moved)] += move_p[m] * (1.0 - env.p_wind);
        row[cell_index(blown)] += move_p[m] * env.p_wind;
      }
      double r = 0.0;
      for (int next = 0; next < kNumCells; ++next)
        if (row[next] != 0.0) r += row[next] * env.arrival_reward(cell_at(next));
      k.expected_reward[s * kNumMoves + a] = r;
    }
  }
  return k;
}

PolicyMatrix uniform_policy() { return PolicyMatrix::Constant(1.0 / kNumMoves); }

PolicyMatrix deterministic_policy(const std::array<int, kNumCells>& moves) {
  PolicyMatrix p = PolicyMatrix::Zero();
  for (int s = 0; s < kNumCells; ++s) p(s, moves[s]) = 1.0;
  return p;
}

namespace {

double q_value(const TransitionKernel& k, const Eigen::VectorXd& v, int s, int a) {
  const double* row = &k.prob[(s * kNumMoves + a) * kNumCells];
  double acc = 0.0;
  for (int next = 0; next < kNumCells; ++next) acc += row[next] * v[next];
  return k.r(s, a) + GridEnv::discount * acc;
}

}  // namespace

ValueSolution value_iteration(const TransitionKernel& kernel) {
  constexpr int kMaxSweeps = 10000;
  const int goal = cell_index(kGoalCell);
  ValueSolution sol;
  sol.values = Eigen::VectorXd::Zero(kNumCells);
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(kNumCells);
    for (int s = 0; s < kNumCells; ++s) {
      if (s == goal) continue;
      double best = q_value(kernel, sol.values, s, 0);
      for (int a = 1; a < kNumMoves; ++a) best = std::max(best, q_value(kernel, sol.values, s, a));
      next[s] = best;
    }
    const double change = (next - sol.values).cwiseAbs().maxCoeff();
    sol.values = std::move(next);
    sol.sweeps = sweep;
    if (change < 1e-10) break;
    if (sweep == kMaxSweeps) throw NumericError("value_iteration: no convergence in 10000 sweeps");
  }
  for (int s = 0; s < kNumCells; ++s) {
    int best_a = 0;
    double best = q_value(kernel, sol.values, s, 0);
    for (int a = 1; a < kNumMoves; ++a) {
      const double q = q_value(kernel, sol.values, s, a);
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    sol.greedy[s] = best_a;
  }
  sol.start_value = sol.values[cell_index(kStartCell)];
  return sol;
}

ValueSolution value_iteration(const GridEnv& env) { return value_iteration(transition_kernel(env)); }

namespace {

// P_pi and r_pi restricted to the policy, goal row left absorbing.
void policy_dynamics(const TransitionKernel& k, const PolicyMatrix& policy, Eigen::MatrixXd& p_pi,
                     Eigen::VectorXd& r_pi) {
  p_pi = Eigen::MatrixXd::Zero(kNumCells, kNumCells);
  r_pi = Eigen::VectorXd::Zero(kNumCells);
  const int goal = cell_index(kGoalCell);
  for (int s = 0; s < kNumCells; ++s) {
    if (s == goal) continue;
    for (int a = 0; a < kNumMoves; ++a) {
      const double w = policy(s, a);
      if (w == 0.0) continue;
      r_pi[s] += w * k.r(s, a);
      for (int next = 0; next < kNumCells; ++next)
        if (next != goal) p_pi(s, next) += w * k.p(s, a, next);
    }
  }
}

}  // namespace

Eigen::VectorXd evaluate_policy(const TransitionKernel& kernel, const PolicyMatrix& policy) {
  Eigen::MatrixXd p_pi;
  Eigen::VectorXd r_pi;
  policy_dynamics(kernel, policy, p_pi, r_pi);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(kNumCells, kNumCells) - GridEnv::discount * p_pi;
  return a.partialPivLu().solve(r_pi);
}

Eigen::VectorXd expected_finite_return(const TransitionKernel& kernel, const PolicyMatrix& policy,
                                       int horizon) {
  Eigen::MatrixXd p_pi;
  Eigen::VectorXd r_pi;
  policy_dynamics(kernel, policy, p_pi, r_pi);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kNumCells);
  for (int h = 0; h < horizon; ++h) v = r_pi + p_pi * v;
  return v;
}

double regret(const GridEnv& env, const PolicyMatrix& policy) {
  const TransitionKernel k = transition_kernel(env);
  const double optimal = value_iteration(k).start_value;
  return optimal - evaluate_policy(k, policy)[cell_index(kStartCell)];
}

nlohmann::json to_json(const GridEnv& env) {
  nlohmann::json traps = nlohmann::json::array();
  for (const Cell& c : env.traps) traps.push_back({c.x, c.y});
  return {{"theta", env.params.theta}, {"traps", traps}, {"p_slip", env.p_slip}, {"p_wind", env.p_wind}};
}

}  // namespace shed
