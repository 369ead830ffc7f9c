#include "doctest.h"

#include <cmath>
#include <vector>

#include "shed/reward.hpp"

using namespace shed;

namespace {

// Independent restatement of the fairness statistic.
double cv_oracle(const std::vector<double>& s, const std::vector<double>& s2) {
  const std::size_t m = s.size();
  std::vector<double> w(m);
  bool moved = false;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = s2[i] - s[i];
    if (std::fabs(w[i]) > 1e-9) moved = true;
  }
  if (!moved) return 0.0;
  double mean = 0;
  for (double x : w) mean += x;
  mean /= double(m);
  if (std::fabs(mean) < 1e-6) return 10.0;
  double ss = 0;
  for (double x : w) ss += (x - mean) * (x - mean);
  const double v = std::sqrt(ss / double(m - 1) / (mean * mean));
  return v > 10.0 ? 10.0 : v;
}

PerfVector vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

}  // namespace

TEST_CASE("cv and reward agree with the reference on random inputs") {
  RandomStream s(17);
  const EnvParams a{{0.2, 0.4, 0.6}};
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 2 + static_cast<int>(s.uniform_index(12));
    std::vector<double> x(m), y(m);
    for (int i = 0; i < m; ++i) {
      x[i] = s.uniform();
      y[i] = s.uniform();
    }
    const double eta = s.uniform(0, 2);
    const double cv = cv_oracle(x, y);
    double l1 = 0, signed_sum = 0;
    for (int i = 0; i < m; ++i) {
      l1 += std::fabs(x[i] - y[i]);
      signed_sum += y[i] - x[i];
    }
    CHECK(compute_cv(vec(x), vec(y)) == doctest::Approx(cv).epsilon(1e-12));
    CHECK(std::fabs(compute_reward(vec(x), a, vec(y), eta) - (l1 - eta * cv)) < 1e-12);
    CHECK(std::fabs(compute_reward(vec(x), a, vec(y), eta, RewardMode::signed_improvement) -
                    (signed_sum - eta * cv)) < 1e-12);
  }
}

TEST_CASE("cv is invariant to scaling the improvements") {
  RandomStream s(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 3 + static_cast<int>(s.uniform_index(8));
    PerfVector x(m), w(m);
    for (int i = 0; i < m; ++i) {
      x[i] = s.uniform(0, 0.5);
      w[i] = s.uniform(0.01, 0.1);
    }
    const double c = s.uniform(0.1, 4.0);
    CHECK(compute_cv(x, x + w) == doctest::Approx(compute_cv(x, x + c * w)).epsilon(1e-9));
  }
}

TEST_CASE("uniform improvement has zero cv") {
  RandomStream s(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 2 + static_cast<int>(s.uniform_index(10));
    PerfVector x(m);
    for (int i = 0; i < m; ++i) x[i] = s.uniform(0, 0.5);
    const double d = s.uniform(0.001, 0.5);
    CHECK(compute_cv(x, (x.array() + d).matrix()) < 1e-6);
  }
}

TEST_CASE("cv guards") {
  const PerfVector z = PerfVector::Constant(4, 0.3);
  CHECK(compute_cv(z, z) == 0.0);
  PerfVector y = z;
  y[0] += 0.1;
  y[1] -= 0.1;  // mean change zero, spread non-zero
  CHECK(compute_cv(z, y) == kCvCap);
  PerfVector big = z;
  big[0] += 0.1;
  big[1] -= 0.0999;  // tiny positive mean, huge relative spread
  CHECK(compute_cv(z, big) == kCvCap);
}

TEST_CASE("reward worked examples") {
  PerfVector s(2), s2(2);
  s << 0.2, 0.4;
  s2 << 0.3, 0.6;
  // w = (0.1, 0.2), mean 0.15, var (1/1)((0.05)^2 * 2) = 0.005, cv = sqrt(0.005)/0.15
  const double cv = std::sqrt(0.005) / 0.15;
  CHECK(compute_cv(s, s2) == doctest::Approx(cv));
  CHECK(compute_reward(s, {}, s2, 0.1) == doctest::Approx(0.3 - 0.1 * cv));
  CHECK(compute_reward(s2, {}, s, 0.1) == doctest::Approx(0.3 - 0.1 * cv));
  CHECK(compute_reward(s2, {}, s, 0.1, RewardMode::signed_improvement) == doctest::Approx(-0.3 - 0.1 * cv));
}
