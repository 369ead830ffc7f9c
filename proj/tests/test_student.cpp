#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "shed/errors.hpp"
#include "shed/student.hpp"

using namespace shed;

TEST_CASE("normalization") {
  CHECK(normalize_return(9.2) == doctest::Approx(0.96));
  CHECK(normalize_return(-3.0) == doctest::Approx(0.35));
  CHECK(normalize_return(-50) == 0.0);
  CHECK(normalize_return(50) == 1.0);
}

TEST_CASE("greedy ties go to the lowest index") {
  StudentPolicy pi = init_student(1);
  auto moves = pi.greedy_moves();
  for (int m : moves) CHECK(m == 0);
  pi.q(5, 2) = 1.0;
  pi.q(5, 3) = 1.0;
  CHECK(pi.greedy_moves()[5] == 2);
}

TEST_CASE("one transition is one Q update") {
  StudentPolicy pi = init_student(2, {.learning_rate = 0.2, .epsilon = 0.0});
  const GridEnv env = build_env({{0, 0, 0}});
  RandomStream s(1);
  train_student(pi, env, 1, s);
  // Greedy picks north at the start corner; the move is clipped in place.
  CHECK(pi.q(0, 0) == doctest::Approx(0.2 * -0.05));
  CHECK((pi.q.array() != 0.0).count() == 1);
}

TEST_CASE("two-step oracle with bootstrapping") {
  StudentPolicy pi = init_student(3, {.learning_rate = 0.5, .epsilon = 0.0});
  const GridEnv env = build_env({{0, 0, 0}});
  RandomStream s(1);
  pi.q(0, 2) = 1.0;   // east from start
  pi.q(1, 1) = 2.0;   // south from (1,0)
  train_student(pi, env, 2, s);
  const double q_next = 2.0;
  const double q_start = 1.0 + 0.5 * (-0.05 + 0.99 * q_next - 1.0);
  CHECK(pi.q(0, 2) == doctest::Approx(q_start));
  // (1,0) south lands on (1,1), all zeros there.
  CHECK(pi.q(1, 1) == doctest::Approx(2.0 + 0.5 * (-0.05 - 2.0)));
}

TEST_CASE("goal transitions do not bootstrap") {
  StudentPolicy pi = init_student(4, {.learning_rate = 1.0, .epsilon = 0.0});
  const GridEnv env = build_env({{0, 0, 0}});
  pi.q(cell_index(kGoalCell), 0) = 500.0;  // must be ignored
  // Drive greedily east then south along the edges.
  for (int x = 0; x < 8; ++x) pi.q(cell_index({x, 0}), 2) = 50.0;
  for (int y = 0; y < 8; ++y) pi.q(cell_index({8, y}), 1) = 50.0;
  RandomStream s(2);
  train_student(pi, env, 16, s);
  CHECK(pi.q(cell_index({8, 7}), 1) == doctest::Approx(9.95));
}

TEST_CASE("Q-learning learns the open grid") {
  const GridEnv env = build_env({{0, 0, 0}});
  for (std::uint64_t seed : {1, 2, 3}) {
    StudentPolicy pi = init_student(seed);
    RandomStream s(seed + 10);
    train_student(pi, env, 50000, s);
    RandomStream e(seed + 20);
    const double g = mean_greedy_return(pi.greedy_moves(), env, 5, e);
    CHECK(std::fabs(g - 9.2) <= 0.5);
    CHECK(pi.q.cwiseAbs().maxCoeff() < kQBound);
  }
}

TEST_CASE("evaluation is deterministic and bounded") {
  const GridEnv env = build_env({{0.5, 0.3, 0.5}});
  StudentPolicy pi = init_student(5);
  RandomStream s(1);
  train_student(pi, env, 3000, s);
  RandomStream e1(9), e2(9);
  const double p1 = evaluate_performance(pi, env, 20, e1), p2 = evaluate_performance(pi, env, 20, e2);
  CHECK(p1 == p2);
  CHECK(p1 >= 0.0);
  CHECK(p1 <= 1.0);
  // A policy that bumps into the north wall forever scores 60 step costs.
  std::array<int, kNumCells> north{};
  RandomStream e3(1);
  CHECK(mean_greedy_return(north, build_env({{0, 0, 0}}), 3, e3) == doctest::Approx(-3.0));
  CHECK(exact_performance(deterministic_policy(north), build_env({{0, 0, 0}})) == doctest::Approx(0.35));
}

TEST_CASE("regret of a trained student is non-negative and shrinks") {
  const GridEnv env = build_env({{0.2, 0.2, 0.3}});
  StudentPolicy pi = init_student(6);
  const double r0 = regret(env, pi);
  RandomStream s(3);
  train_student(pi, env, 50000, s);
  const double r1 = regret(env, pi);
  CHECK(r1 >= -1e-9);
  CHECK(r1 < r0);
}

TEST_CASE("annealing to the starting epsilon changes nothing") {
  const GridEnv env = build_env({{0.3, 0.3, 0.3}});
  StudentPolicy a = init_student(7), b = init_student(7);
  RandomStream sa(1), sb(1);
  train_student(a, env, 2000, sa);
  train_student(b, env, 2000, sb, {.anneal_epsilon_to = b.epsilon});
  CHECK(a.q == b.q);
  StudentPolicy c = init_student(7);
  RandomStream sc(1);
  train_student(c, env, 2000, sc, {.anneal_epsilon_to = 0.0});
  CHECK(c.q != a.q);
}

TEST_CASE("Q-table csv has 81 rows of 4 columns") {
  StudentPolicy pi = init_student(8);
  pi.q(3, 1) = 0.25;
  const std::string path = (std::filesystem::temp_directory_path() / "test_student_qtable.csv").string();
  write_q_table_csv(pi, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "north,south,east,west");
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
  }
  CHECK(rows == 81);
}
