#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "shed/gridnav.hpp"
#include "shed/student.hpp"

namespace shed {

/// Student performance on each evaluation environment, components in [0,1].
using PerfVector = Eigen::VectorXd;

enum class EvalSampling { latin_hypercube, random };

struct EvalSet {
  std::vector<EnvParams> thetas;
  std::vector<GridEnv> envs;
  std::uint64_t construction_seed = 0;

  int size() const { return static_cast<int>(envs.size()); }
  nlohmann::json manifest() const;
};

/// Latin hypercube over [0,1]^3: per dimension one uniform draw inside each of
/// the m equal bins, bin order permuted per dimension.
EvalSet make_eval_set(int m, std::uint64_t seed, EvalSampling sampling = EvalSampling::latin_hypercube);

inline constexpr int kDefaultEvalEpisodes = 20;

/// Component i uses the stream combine_seed(eval_seed, i), so the same policy
/// always maps to the same vector.
PerfVector performance_vector(const std::array<int, kNumCells>& moves, const EvalSet& set,
                              std::uint64_t eval_seed, int episodes = kDefaultEvalEpisodes);
PerfVector performance_vector(const StudentPolicy& pi, const EvalSet& set, std::uint64_t eval_seed,
                              int episodes = kDefaultEvalEpisodes);

struct GapPoint {
  double delta = 0.0;
  double gap = 0.0;
};

/// Empirical check of continuity of exact performance along slip (0) or wind (1)
/// with policy and trap layout held fixed.
struct ContinuityProbe {
  EnvParams base_theta;
  int dimension = 0;
  std::vector<GapPoint> curve;

  /// max gap / delta over points with delta > 0.
  double lipschitz_estimate() const;
};

/// For each delta: max over theta +/- delta * e_dim (clipped to [0,1]) of the
/// change in exact performance. Dimension 2 (trap count) is rejected.
ContinuityProbe continuity_probe(const PolicyMatrix& policy, const EnvParams& theta, int dimension,
                                 std::span<const double> deltas);

}  // namespace shed
