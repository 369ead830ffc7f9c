#include "shed/reward.hpp"

#include <algorithm>
#include <cmath>

#include "shed/errors.hpp"

namespace shed {

double compute_cv(const PerfVector& s, const PerfVector& s_next) {
  if (s.size() != s_next.size()) throw ConfigError("compute_cv: vector lengths differ");
  if (s.size() < 2) throw ConfigError("compute_cv: need m >= 2");
  const Eigen::VectorXd omega = s_next - s;
  if (omega.cwiseAbs().maxCoeff() <= 1e-9) return 0.0;
  const double mean = omega.mean();
  if (std::abs(mean) < 1e-6) return kCvCap;
  const double m = static_cast<double>(omega.size());
  const double ss = (omega.array() - mean).square().sum() / (mean * mean);
  return std::min(std::sqrt(ss / (m - 1.0)), kCvCap);
}

double compute_reward(const PerfVector& s, const EnvParams& /*a*/, const PerfVector& s_next,
                      double eta, RewardMode mode) {
  const double cv = compute_cv(s, s_next);
  const double gain = mode == RewardMode::l1 ? (s - s_next).cwiseAbs().sum() : (s_next - s).sum();
  return gain - eta * cv;
}

}  // namespace shed
