#include "doctest.h"

#include <cmath>

#include "shed/errors.hpp"
#include "shed/replay.hpp"

using namespace shed;

namespace {

TeacherTransition make(double tag, Origin o) {
  TeacherTransition t;
  t.s = PerfVector::Constant(3, tag);
  t.s_next = PerfVector::Constant(3, tag);
  t.r = tag;
  t.origin = o;
  return t;
}

}  // namespace

TEST_CASE("fifo eviction at capacity") {
  ReplayBuffer b(Origin::real, 3);
  for (int i = 0; i < 5; ++i) b.push(make(i, Origin::real));
  CHECK(b.size() == 3);
  CHECK(b[0].r == 2);
  CHECK(b[2].r == 4);
}

TEST_CASE("origin labels are enforced") {
  ReplayBuffer b(Origin::synthetic);
  CHECK_THROWS_AS(b.push(make(0, Origin::real)), ConfigError);
  CHECK(std::string(to_string(Origin::synthetic)) == "synthetic");
}

TEST_CASE("uniform sampling covers the buffer") {
  ReplayBuffer b(Origin::real);
  for (int i = 0; i < 4; ++i) b.push(make(i, Origin::real));
  RandomStream s(1);
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < 8000; ++i) ++counts[static_cast<int>(b.sample(s).r)];
  for (int c : counts) CHECK(std::abs(c - 2000) < 200);
}

TEST_CASE("mixed batch composition is exact") {
  ReplayBuffer real(Origin::real), syn(Origin::synthetic);
  for (int i = 0; i < 10; ++i) {
    real.push(make(1, Origin::real));
    syn.push(make(2, Origin::synthetic));
  }
  RandomStream s(2);
  for (double psi : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const MixedBatch mb = sample_mixed(real, syn, 64, psi, s);
    const int want = static_cast<int>(std::lround(psi * 64));
    CHECK(mb.from_real == want);
    CHECK(mb.from_synthetic == 64 - want);
    CHECK(mb.substituted == 0);
    int r = 0;
    for (const auto& t : mb.transitions) r += t.origin == Origin::real;
    CHECK(r == want);
    CHECK(mb.transitions.size() == 64);
  }
}

TEST_CASE("empty side is filled from the other") {
  ReplayBuffer real(Origin::real), syn(Origin::synthetic);
  real.push(make(1, Origin::real));
  RandomStream s(3);
  const MixedBatch mb = sample_mixed(real, syn, 10, 0.3, s);
  CHECK(mb.from_real == 10);
  CHECK(mb.substituted == 7);
  ReplayBuffer empty(Origin::real);
  CHECK_THROWS_AS(sample_mixed(empty, syn, 10, 0.5, s), ConfigError);
  CHECK_THROWS_AS(sample_mixed(syn, real, 10, 0.5, s), ConfigError);
}
