#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "shed/gridnav.hpp"
#include "shed/mlp.hpp"
#include "shed/rng.hpp"

namespace shed {

/// Frozen random network standing in for how the student's performance vector
/// evolves: f(s, a) in [0,1]^d, observed with additive Gaussian noise of
/// standard deviation noise_scale * base_sigma and clamped to [0,1].
class SurrogateDynamics {
 public:
  SurrogateDynamics(int state_dim, double noise_scale, double base_sigma, std::uint64_t seed,
                    int hidden = 32);

  int state_dim() const { return state_dim_; }
  double noise_std() const { return noise_scale_ * base_sigma_; }
  double noise_scale() const { return noise_scale_; }

  Eigen::VectorXd mean_next(const Eigen::VectorXd& s, const EnvParams& a) const;
  Eigen::VectorXd sample_next(const Eigen::VectorXd& s, const EnvParams& a, RandomStream& stream) const;

 private:
  int state_dim_;
  double noise_scale_;
  double base_sigma_;
  Mlp f_;
};

}  // namespace shed
