#include "shed/eval_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shed/errors.hpp"

namespace shed {

nlohmann::json EvalSet::manifest() const {
  nlohmann::json thetas_json = nlohmann::json::array();
  for (const auto& t : thetas) thetas_json.push_back(t.theta);
  return {{"m", size()}, {"seed", construction_seed}, {"thetas", thetas_json}};
}

EvalSet make_eval_set(int m, std::uint64_t seed, EvalSampling sampling) {
  if (m < 2) throw ConfigError("make_eval_set: m must be >= 2");
  RandomStream stream(seed);
  EvalSet set;
  set.construction_seed = seed;
  set.thetas.resize(m);

  for (int d = 0; d < 3; ++d) {
    if (sampling == EvalSampling::random) {
      for (int j = 0; j < m; ++j) set.thetas[j].theta[d] = stream.uniform();
      continue;
    }
    std::vector<int> bins(m);
    std::iota(bins.begin(), bins.end(), 0);
    for (int i = m - 1; i > 0; --i)
      std::swap(bins[i], bins[stream.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
    for (int j = 0; j < m; ++j) set.thetas[j].theta[d] = (bins[j] + stream.uniform()) / m;
  }
  for (const auto& t : set.thetas) set.envs.push_back(build_env(t));
  return set;
}

PerfVector performance_vector(const std::array<int, kNumCells>& moves, const EvalSet& set,
                              std::uint64_t eval_seed, int episodes) {
  PerfVector p(set.size());
  for (int i = 0; i < set.size(); ++i) {
    RandomStream stream(combine_seed(eval_seed, static_cast<std::uint64_t>(i)));
    p[i] = evaluate_performance(moves, set.envs[i], episodes, stream);
  }
  return p;
}

PerfVector performance_vector(const StudentPolicy& pi, const EvalSet& set, std::uint64_t eval_seed,
                              int episodes) {
  return performance_vector(pi.greedy_moves(), set, eval_seed, episodes);
}

double ContinuityProbe::lipschitz_estimate() const {
  double l = 0.0;
  for (const auto& pt : curve)
    if (pt.delta > 0.0) l = std::max(l, pt.gap / pt.delta);
  return l;
}

ContinuityProbe continuity_probe(const PolicyMatrix& policy, const EnvParams& theta, int dimension,
                                 std::span<const double> deltas) {
  if (dimension == 2) throw ConfigError("continuity_probe: trap dimension is discontinuous");
  if (dimension < 0 || dimension > 2) throw ConfigError("continuity_probe: dimension must be 0 or 1");
  validate(theta);

  const GridEnv base = build_env(theta);
  const double base_perf = exact_performance(policy, base);
  ContinuityProbe probe{theta, dimension, {}};
  for (double delta : deltas) {
    if (delta < 0.0) throw ConfigError("continuity_probe: delta must be non-negative");
    double gap = 0.0;
    for (double sign : {-1.0, 1.0}) {
      EnvParams moved = theta;
      moved.theta[dimension] = std::clamp(theta.theta[dimension] + sign * delta, 0.0, 1.0);
      const GridEnv env = build_env_with_layout(moved, base);
      gap = std::max(gap, std::abs(exact_performance(policy, env) - base_perf));
    }
    probe.curve.push_back({delta, gap});
  }
  return probe;
}

}  // namespace shed
