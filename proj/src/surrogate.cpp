#include "shed/surrogate.hpp"

#include "shed/errors.hpp"

namespace shed {

SurrogateDynamics::SurrogateDynamics(int state_dim, double noise_scale, double base_sigma,
                                     std::uint64_t seed, int hidden)
    : state_dim_(state_dim), noise_scale_(noise_scale), base_sigma_(base_sigma) {
  if (state_dim < 1 || noise_scale < 0.0 || base_sigma < 0.0)
    throw ConfigError("SurrogateDynamics: bad dimensions or noise");
  RandomStream init(seed);
  f_ = Mlp::glorot({state_dim + 3, hidden, hidden, state_dim}, Activation::tanh, Activation::sigmoid, init);
}

Eigen::VectorXd SurrogateDynamics::mean_next(const Eigen::VectorXd& s, const EnvParams& a) const {
  if (s.size() != state_dim_) throw ConfigError("SurrogateDynamics: state length mismatch");
  Eigen::VectorXd x(state_dim_ + 3);
  x.head(state_dim_) = 2.0 * s.array() - 1.0;
  for (int d = 0; d < 3; ++d) x[state_dim_ + d] = 2.0 * a.theta[d] - 1.0;
  return f_.forward(x);
}

Eigen::VectorXd SurrogateDynamics::sample_next(const Eigen::VectorXd& s, const EnvParams& a,
                                               RandomStream& stream) const {
  Eigen::VectorXd next = mean_next(s, a);
  for (int d = 0; d < state_dim_; ++d) next[d] += noise_std() * stream.gaussian();
  return next.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace shed
