#include "shed/student.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "shed/errors.hpp"

namespace shed {

namespace {

int argmax_row(const QTable& q, int s) {
  int best = 0;
  for (int a = 1; a < kNumMoves; ++a)
    if (q(s, a) > q(s, best)) best = a;
  return best;
}

}  // namespace

std::array<int, kNumCells> StudentPolicy::greedy_moves() const {
  std::array<int, kNumCells> moves{};
  for (int s = 0; s < kNumCells; ++s) moves[s] = argmax_row(q, s);
  return moves;
}

StudentPolicy init_student(std::uint64_t seed, const StudentConfig& config) {
  if (!(config.learning_rate > 0.0) || config.epsilon < 0.0 || config.epsilon > 1.0)
    throw ConfigError("init_student: learning_rate must be > 0 and epsilon in [0,1]");
  StudentPolicy pi;
  pi.learning_rate = config.learning_rate;
  pi.epsilon = config.epsilon;
  pi.exploration = RandomStream(seed);
  return pi;
}

void train_student(StudentPolicy& pi, const GridEnv& env, long steps, RandomStream& stream,
                   const TrainOptions& options) {
  const double eps_start = pi.epsilon;
  const double eps_end = options.anneal_epsilon_to.value_or(eps_start);
  Cell cell = kStartCell;
  int elapsed = 0;
  for (long t = 0; t < steps; ++t) {
    const double eps =
        steps > 1 ? eps_start + (eps_end - eps_start) * static_cast<double>(t) / (steps - 1) : eps_start;
    const int s = cell_index(cell);
    int a = argmax_row(pi.q, s);
    if (pi.exploration.uniform() < eps) a = static_cast<int>(pi.exploration.uniform_index(kNumMoves));

    const EnvOutcome out = env_step(env, cell, static_cast<Move>(a), stream, elapsed);
    const int next = cell_index(out.next_cell);
    const bool terminal = out.next_cell == kGoalCell;
    const double target = terminal ? out.reward : out.reward + pi.discount * pi.q.row(next).maxCoeff();
    double& q = pi.q(s, a);
    q += pi.learning_rate * (target - q);
    if (!std::isfinite(q) || std::abs(q) > kQBound)
      throw NumericError("train_student: Q-value left the assertion bound");

    if (out.done) {
      cell = kStartCell;
      elapsed = 0;
    } else {
      cell = out.next_cell;
      ++elapsed;
    }
  }
}

double normalize_return(double mean_return) {
  return std::clamp((mean_return - kReturnLow) / (kReturnHigh - kReturnLow), 0.0, 1.0);
}

double mean_greedy_return(const std::array<int, kNumCells>& moves, const GridEnv& env, int episodes,
                          RandomStream& stream) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Cell cell = kStartCell;
    for (int t = 0; t < GridEnv::horizon; ++t) {
      const EnvOutcome out = env_step(env, cell, static_cast<Move>(moves[cell_index(cell)]), stream, t);
      total += out.reward;
      cell = out.next_cell;
      if (out.done) break;
    }
  }
  return total / episodes;
}

double evaluate_performance(const std::array<int, kNumCells>& moves, const GridEnv& env,
                            int episodes, RandomStream& stream) {
  return normalize_return(mean_greedy_return(moves, env, episodes, stream));
}

double evaluate_performance(const StudentPolicy& pi, const GridEnv& env, int episodes,
                            RandomStream& stream) {
  return evaluate_performance(pi.greedy_moves(), env, episodes, stream);
}

double exact_performance(const PolicyMatrix& policy, const GridEnv& env) {
  const auto returns = expected_finite_return(transition_kernel(env), policy);
  return normalize_return(returns[cell_index(kStartCell)]);
}

double regret(const GridEnv& env, const StudentPolicy& pi) { return regret(env, pi.greedy_policy()); }

void write_q_table_csv(const StudentPolicy& pi, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  // Row order is the cell index y * width + x.
  out << "north,south,east,west\n" << std::setprecision(17);
  for (int s = 0; s < kNumCells; ++s)
    out << pi.q(s, 0) << ',' << pi.q(s, 1) << ',' << pi.q(s, 2) << ',' << pi.q(s, 3) << '\n';
}

}  // namespace shed
