#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "shed/eval_set.hpp"
#include "shed/gridnav.hpp"
#include "shed/rng.hpp"

namespace shed {

enum class Origin { real, synthetic };

const char* to_string(Origin origin);

/// One upper-level experience (s, a, r, s').
struct TeacherTransition {
  PerfVector s;
  EnvParams a;
  double r = 0.0;
  PerfVector s_next;
  Origin origin = Origin::real;
  bool terminal = false;
};

/// Bounded FIFO of transitions that all carry the buffer's origin label.
class ReplayBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 100000;

  explicit ReplayBuffer(Origin label, std::size_t capacity = kDefaultCapacity);

  /// Throws ConfigError when the transition's origin differs from the label.
  void push(TeacherTransition t);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  Origin label() const { return label_; }

  /// Oldest first.
  const TeacherTransition& operator[](std::size_t i) const { return entries_[i]; }

  /// Uniform draw with replacement.
  const TeacherTransition& sample(RandomStream& stream) const;

 private:
  Origin label_;
  std::size_t capacity_;
  std::deque<TeacherTransition> entries_;
};

struct MixedBatch {
  std::vector<TeacherTransition> transitions;
  int from_real = 0;
  int from_synthetic = 0;
  // Draws moved to the other buffer because the intended one was empty.
  int substituted = 0;
};

/// round(psi * batch_size) draws from the real buffer, the rest from the
/// synthetic one; an empty side is filled from the other.
MixedBatch sample_mixed(const ReplayBuffer& real, const ReplayBuffer& synthetic, int batch_size,
                        double psi, RandomStream& stream);

}  // namespace shed
