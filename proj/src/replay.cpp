#include "shed/replay.hpp"

#include <cmath>

#include "shed/errors.hpp"

namespace shed {

const char* to_string(Origin origin) { return origin == Origin::real ? "real" : "synthetic"; }

ReplayBuffer::ReplayBuffer(Origin label, std::size_t capacity) : label_(label), capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(TeacherTransition t) {
  if (t.origin != label_)
    throw ConfigError(std::string("ReplayBuffer: ") + to_string(t.origin) +
                      " transition pushed into " + to_string(label_) + " buffer");
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(t));
}

const TeacherTransition& ReplayBuffer::sample(RandomStream& stream) const {
  if (entries_.empty()) throw ConfigError("ReplayBuffer: sample from empty buffer");
  return entries_[stream.uniform_index(entries_.size())];
}

MixedBatch sample_mixed(const ReplayBuffer& real, const ReplayBuffer& synthetic, int batch_size,
                        double psi, RandomStream& stream) {
  if (batch_size < 1) throw ConfigError("sample_mixed: batch_size must be >= 1");
  if (!(psi >= 0.0 && psi <= 1.0)) throw ConfigError("sample_mixed: psi must be in [0,1]");
  if (real.label() != Origin::real || synthetic.label() != Origin::synthetic)
    throw ConfigError("sample_mixed: buffers passed in the wrong order");
  if (real.empty() && synthetic.empty()) throw ConfigError("sample_mixed: both buffers are empty");

  MixedBatch batch;
  int want_real = static_cast<int>(std::lround(psi * batch_size));
  int want_syn = batch_size - want_real;
  if (synthetic.empty()) {
    batch.substituted = want_syn;
    want_real += want_syn;
    want_syn = 0;
  } else if (real.empty()) {
    batch.substituted = want_real;
    want_syn += want_real;
    want_real = 0;
  }
  batch.transitions.reserve(batch_size);
  for (int i = 0; i < want_real; ++i) batch.transitions.push_back(real.sample(stream));
  for (int i = 0; i < want_syn; ++i) batch.transitions.push_back(synthetic.sample(stream));
  batch.from_real = want_real;
  batch.from_synthetic = want_syn;
  return batch;
}

}  // namespace shed
