#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shed/errors.hpp"
#include "shed/eval_set.hpp"

using namespace shed;

TEST_CASE("latin hypercube puts one point in every bin of every dimension") {
  for (int m : {2, 5, 10, 17}) {
    const EvalSet set = make_eval_set(m, 99);
    REQUIRE(set.size() == m);
    for (int d = 0; d < 3; ++d) {
      std::vector<int> bins(m, 0);
      for (const auto& t : set.thetas) {
        REQUIRE(t.theta[d] >= 0.0);
        REQUIRE(t.theta[d] < 1.0);
        ++bins[static_cast<int>(std::floor(t.theta[d] * m))];
      }
      CHECK(std::all_of(bins.begin(), bins.end(), [](int c) { return c == 1; }));
    }
  }
}

TEST_CASE("construction is seeded") {
  const EvalSet a = make_eval_set(10, 5), b = make_eval_set(10, 5), c = make_eval_set(10, 6);
  CHECK(a.thetas == b.thetas);
  CHECK(a.thetas != c.thetas);
  CHECK(make_eval_set(10, 5, EvalSampling::random).thetas != a.thetas);
  CHECK_THROWS_AS(make_eval_set(1, 5), ConfigError);
}

TEST_CASE("manifest fields") {
  const EvalSet set = make_eval_set(4, 12);
  const auto j = set.manifest();
  CHECK(j["m"] == 4);
  CHECK(j["seed"] == 12);
  CHECK(j["thetas"].size() == 4);
  CHECK(j["thetas"][2].size() == 3);
  CHECK(j["thetas"][2][1].get<double>() == set.thetas[2].theta[1]);
}

TEST_CASE("performance vector is reproducible and in range") {
  const EvalSet set = make_eval_set(6, 3);
  StudentPolicy pi = init_student(1);
  RandomStream s(2);
  train_student(pi, set.envs[0], 5000, s);
  const PerfVector a = performance_vector(pi, set, 77), b = performance_vector(pi, set, 77);
  CHECK(a == b);
  CHECK(a.size() == 6);
  CHECK(a.minCoeff() >= 0.0);
  CHECK(a.maxCoeff() <= 1.0);
  // Component i only depends on its own environment and stream.
  EvalSet sub = set;
  sub.envs.erase(sub.envs.begin() + 3, sub.envs.end());
  sub.thetas.erase(sub.thetas.begin() + 3, sub.thetas.end());
  CHECK(performance_vector(pi, sub, 77) == a.head(3));
}

TEST_CASE("continuity of exact performance near the centre") {
  const EnvParams theta{{0.5, 0.5, 0.0}};
  const PolicyMatrix pi = value_iteration(build_env(theta)).policy();
  const std::vector<double> deltas{0.1, 0.01, 0.001};
  for (int dim : {0, 1}) {
    const ContinuityProbe p = continuity_probe(pi, theta, dim, deltas);
    REQUIRE(p.curve.size() == 3);
    CHECK(p.curve[1].gap <= p.curve[0].gap);
    CHECK(p.curve[2].gap <= p.curve[1].gap);
    CHECK(p.curve[2].gap < 0.01);
    CHECK(p.lipschitz_estimate() < 10.0);
  }
  CHECK_THROWS_AS(continuity_probe(pi, theta, 2, deltas), ConfigError);
}

TEST_CASE("zero perturbation has zero gap") {
  const EnvParams theta{{0.3, 0.7, 0.5}};
  const PolicyMatrix pi = uniform_policy();
  const std::vector<double> deltas{0.0};
  CHECK(continuity_probe(pi, theta, 0, deltas).curve[0].gap == 0.0);
}
