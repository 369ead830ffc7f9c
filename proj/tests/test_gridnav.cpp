#include "doctest.h"

#include <cmath>
#include <set>

#include "shed/errors.hpp"
#include "shed/gridnav.hpp"

using namespace shed;

TEST_CASE("moves and boundary clipping") {
  CHECK(apply_move({3, 3}, Move::north) == Cell{3, 2});
  CHECK(apply_move({3, 3}, Move::south) == Cell{3, 4});
  CHECK(apply_move({3, 3}, Move::east) == Cell{4, 3});
  CHECK(apply_move({3, 3}, Move::west) == Cell{2, 3});
  CHECK(apply_move({0, 0}, Move::north) == Cell{0, 0});
  CHECK(apply_move({0, 0}, Move::west) == Cell{0, 0});
  CHECK(apply_move({8, 8}, Move::east) == Cell{8, 8});
  CHECK(apply_move({8, 8}, Move::south) == Cell{8, 8});
  for (int i = 0; i < kNumCells; ++i) CHECK(cell_index(cell_at(i)) == i);
}

TEST_CASE("parameter mapping and trap layout") {
  for (double t2 : {0.0, 0.03, 0.5, 0.97, 1.0}) {
    const GridEnv env = build_env({{0.25, 0.75, t2}});
    CHECK(env.p_slip == doctest::Approx(0.1));
    CHECK(env.p_wind == doctest::Approx(0.3));
    CHECK(env.traps.size() == static_cast<std::size_t>(std::lround(16 * t2)));
    CHECK_FALSE(env.is_trap(kStartCell));
    CHECK_FALSE(env.is_trap(kGoalCell));
    std::set<int> uniq;
    for (Cell c : env.traps) {
      uniq.insert(cell_index(c));
      CHECK(env.is_trap(c));
    }
    CHECK(uniq.size() == env.traps.size());
  }
  const GridEnv a = build_env({{0.1, 0.2, 0.6}}), b = build_env({{0.1, 0.2, 0.6}});
  CHECK(a.traps == b.traps);
  CHECK_THROWS_AS(build_env({{1.1, 0, 0}}), ConfigError);
  CHECK_THROWS_AS(build_env({{0, std::nan(""), 0}}), ConfigError);
}

TEST_CASE("layout transplant keeps dynamics and copies traps") {
  const GridEnv base = build_env({{0.5, 0.5, 0.8}});
  const GridEnv other = build_env_with_layout({{0.2, 0.9, 0.1}}, base);
  CHECK(other.traps == base.traps);
  CHECK(other.p_slip == doctest::Approx(0.08));
  CHECK(other.p_wind == doctest::Approx(0.36));
}

TEST_CASE("rewards of single steps") {
  const GridEnv env = build_env({{0, 0, 0}});
  RandomStream s(1);
  auto o = env_step(env, {7, 8}, Move::east, s);
  CHECK(o.next_cell == kGoalCell);
  CHECK(o.reward == doctest::Approx(9.95));
  CHECK(o.done);
  o = env_step(env, {0, 0}, Move::north, s);
  CHECK(o.next_cell == kStartCell);
  CHECK(o.reward == doctest::Approx(-0.05));
  CHECK_FALSE(o.done);
  o = env_step(env, {2, 2}, Move::south, s, GridEnv::horizon - 1);
  CHECK(o.done);
  CHECK_THROWS(env_step(env, {2, 2}, Move::south, s, GridEnv::horizon));
}

TEST_CASE("trap arrival adds the penalty") {
  const GridEnv env = build_env({{0, 0, 1}});
  REQUIRE_FALSE(env.traps.empty());
  const Cell t = env.traps.front();
  CHECK(env.arrival_reward(t) == doctest::Approx(-1.05));
}

TEST_CASE("kernel rows are distributions and theta = 0 is deterministic") {
  const TransitionKernel k = transition_kernel(build_env({{0.7, 0.4, 0.5}}));
  for (int s = 0; s < kNumCells; ++s)
    for (int a = 0; a < kNumMoves; ++a) {
      double sum = 0;
      for (int n = 0; n < kNumCells; ++n) {
        CHECK(k.p(s, a, n) >= 0.0);
        sum += k.p(s, a, n);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  const TransitionKernel k0 = transition_kernel(build_env({{0, 0, 0}}));
  const int s = cell_index({4, 4});
  CHECK(k0.p(s, 2, cell_index({5, 4})) == 1.0);
  CHECK(k0.r(s, 2) == doctest::Approx(-0.05));
  const int g = cell_index(kGoalCell);
  CHECK(k0.p(g, 0, g) == 1.0);
  CHECK(k0.r(g, 0) == 0.0);
}

TEST_CASE("kernel matches sampled transitions") {
  const GridEnv env = build_env({{0.8, 0.6, 0.5}});
  const TransitionKernel k = transition_kernel(env);
  RandomStream s(3);
  const int draws = 40000;
  for (Cell c : {Cell{0, 0}, Cell{4, 4}, Cell{8, 3}}) {
    for (int a = 0; a < kNumMoves; ++a) {
      std::vector<double> freq(kNumCells, 0.0);
      double rsum = 0;
      for (int i = 0; i < draws; ++i) {
        const EnvOutcome o = env_step(env, c, static_cast<Move>(a), s);
        freq[cell_index(o.next_cell)] += 1.0 / draws;
        rsum += o.reward;
      }
      double tv = 0;
      for (int n = 0; n < kNumCells; ++n) tv += 0.5 * std::fabs(freq[n] - k.p(cell_index(c), a, n));
      CHECK(tv < 0.02);
      CHECK(rsum / draws == doctest::Approx(k.r(cell_index(c), a)).epsilon(0.05));
    }
  }
}

TEST_CASE("value iteration on the open deterministic grid") {
  const GridEnv env = build_env({{0, 0, 0}});
  const ValueSolution sol = value_iteration(env);
  double expect = 0;
  for (int t = 0; t < 15; ++t) expect += std::pow(0.99, t) * -0.05;
  expect += std::pow(0.99, 15) * 9.95;
  CHECK(std::fabs(sol.start_value - expect) < 1e-6);
  CHECK(sol.start_value == doctest::Approx(7.858).epsilon(1e-3));
  // 16 moves: 15 plain steps then the goal step.
  const Eigen::VectorXd g = expected_finite_return(transition_kernel(env), sol.policy());
  CHECK(g[cell_index(kStartCell)] == doctest::Approx(15 * -0.05 + 9.95));
  CHECK(regret(env, sol.policy()) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
}

TEST_CASE("exact evaluation of the optimal policy equals V*") {
  for (EnvParams p : {EnvParams{{0.3, 0.6, 0.4}}, EnvParams{{1, 1, 1}}}) {
    const TransitionKernel k = transition_kernel(build_env(p));
    const ValueSolution sol = value_iteration(k);
    const Eigen::VectorXd v = evaluate_policy(k, sol.policy());
    CHECK((v - sol.values).cwiseAbs().maxCoeff() < 1e-7);
    // Bellman optimality residual.
    for (int s = 0; s < kNumCells; ++s) {
      double best = -1e300;
      for (int a = 0; a < kNumMoves; ++a) {
        double q = k.r(s, a);
        for (int n = 0; n < kNumCells; ++n) q += 0.99 * k.p(s, a, n) * sol.values[n];
        best = std::max(best, q);
      }
      CHECK(std::fabs(best - sol.values[s]) < 1e-8);
    }
    CHECK(regret(build_env(p), uniform_policy()) > 0.0);
  }
}

TEST_CASE("finite return matches Monte Carlo rollouts") {
  const GridEnv env = build_env({{0.5, 0.5, 0.5}});
  const ValueSolution sol = value_iteration(env);
  const double exact = expected_finite_return(transition_kernel(env), sol.policy())[0];
  RandomStream s(8);
  const int episodes = 20000;
  double total = 0;
  for (int e = 0; e < episodes; ++e) {
    Cell c = kStartCell;
    for (int t = 0; t < GridEnv::horizon; ++t) {
      const EnvOutcome o = env_step(env, c, static_cast<Move>(sol.greedy[cell_index(c)]), s, t);
      total += o.reward;
      c = o.next_cell;
      if (o.done) break;
    }
  }
  CHECK(std::fabs(total / episodes - exact) < 0.05);
}

TEST_CASE("json form of an environment") {
  const GridEnv env = build_env({{0.1, 0.2, 0.25}});
  const auto j = to_json(env);
  CHECK(j["theta"].size() == 3);
  CHECK(j["traps"].size() == 4);
  CHECK(j["traps"][0].size() == 2);
  CHECK(j["p_slip"].get<double>() == doctest::Approx(0.04));
  CHECK(j["p_wind"].get<double>() == doctest::Approx(0.08));
}
