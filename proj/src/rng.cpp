#include "shed/rng.hpp"

#include <cmath>
#include <numbers>
#include "shed/errors.hpp"

namespace shed {

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform_index: empty range");
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x = (*this)();
  while (x >= limit) x = (*this)();
  return x % n;
}

double RandomStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

Eigen::VectorXd sample_gaussian(RandomStream& stream, int n) {
  if (n < 1) throw ConfigError("sample_gaussian: n must be >= 1");
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = stream.gaussian();
  return out;
}

}  // namespace shed
