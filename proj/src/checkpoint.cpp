#include "shed/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

#include "shed/errors.hpp"

namespace shed {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian hosts");

long element_count(const std::vector<long>& shape) {
  return std::accumulate(shape.begin(), shape.end(), 1L, std::multiplies<>());
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void Checkpoint::add(NamedTensor t) {
  if (element_count(t.shape) != t.data.size())
    throw ConfigError("Checkpoint: tensor " + t.name + " shape does not match data length");
  tensors_.push_back(std::move(t));
}

void Checkpoint::add_mlp(const std::string& prefix, const Mlp& net) {
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weight(l);
    const auto b = net.bias(l);
    add({prefix + ".W" + std::to_string(l), {static_cast<long>(w.rows()), static_cast<long>(w.cols())},
         Eigen::Map<const Eigen::VectorXd>(w.data(), w.size())});
    add({prefix + ".b" + std::to_string(l), {static_cast<long>(b.size())}, b});
  }
}

void Checkpoint::add_adam(const std::string& prefix, const AdamState& state) {
  const long n = state.first_moment.size();
  add({prefix + ".first_moment", {n}, state.first_moment});
  add({prefix + ".second_moment", {n}, state.second_moment});
  meta_[prefix + ".step_count"] = state.step_count;
  meta_[prefix + ".learning_rate"] = state.config.learning_rate;
}

const NamedTensor& Checkpoint::get(const std::string& name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return t;
  throw ConfigError("Checkpoint: missing tensor " + name);
}

void Checkpoint::load_mlp(const std::string& prefix, Mlp& net) const {
  for (int l = 0; l < net.num_layers(); ++l) {
    auto w = net.weight(l);
    auto b = net.bias(l);
    const auto& tw = get(prefix + ".W" + std::to_string(l));
    const auto& tb = get(prefix + ".b" + std::to_string(l));
    if (tw.shape != std::vector<long>{static_cast<long>(w.rows()), static_cast<long>(w.cols())} ||
        tb.shape != std::vector<long>{static_cast<long>(b.size())})
      throw ConfigError("Checkpoint: shape mismatch for " + prefix + " layer " + std::to_string(l));
    std::memcpy(w.data(), tw.data.data(), sizeof(double) * tw.data.size());
    b = tb.data;
  }
}

void Checkpoint::load_adam(const std::string& prefix, AdamState& state) const {
  const auto& m = get(prefix + ".first_moment");
  const auto& v = get(prefix + ".second_moment");
  if (m.data.size() != state.first_moment.size() || v.data.size() != state.second_moment.size())
    throw ConfigError("Checkpoint: optimizer shape mismatch for " + prefix);
  state.first_moment = m.data;
  state.second_moment = v.data;
  state.step_count = meta_.at(prefix + ".step_count").get<long>();
}

void Checkpoint::write(const std::filesystem::path& stem) const {
  nlohmann::json sidecar;
  sidecar["format"] = "shed-checkpoint-v1";
  sidecar["dtype"] = "float64-le";
  sidecar["meta"] = meta_;
  sidecar["tensors"] = nlohmann::json::array();
  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw ConfigError("Checkpoint: cannot write " + with_suffix(stem, ".bin").string());
  long offset = 0;
  for (const auto& t : tensors_) {
    sidecar["tensors"].push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    bin.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(sizeof(double) * t.data.size()));
    offset += t.data.size();
  }
  sidecar["total_elements"] = offset;
  std::ofstream js(with_suffix(stem, ".json"));
  js << sidecar.dump(2) << '\n';
}

Checkpoint Checkpoint::read(const std::filesystem::path& stem) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw ConfigError("Checkpoint: cannot read " + with_suffix(stem, ".json").string());
  const nlohmann::json sidecar = nlohmann::json::parse(js);
  if (sidecar.value("format", "") != "shed-checkpoint-v1")
    throw ConfigError("Checkpoint: unknown format in " + stem.string());

  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw ConfigError("Checkpoint: cannot read " + with_suffix(stem, ".bin").string());
  Checkpoint ck;
  ck.meta_ = sidecar.at("meta");
  for (const auto& entry : sidecar.at("tensors")) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<std::vector<long>>();
    t.data.resize(element_count(t.shape));
    bin.seekg(static_cast<std::streamoff>(entry.at("offset").get<long>() * sizeof(double)));
    bin.read(reinterpret_cast<char*>(t.data.data()),
             static_cast<std::streamsize>(sizeof(double) * t.data.size()));
    if (!bin) throw ConfigError("Checkpoint: truncated binary for " + t.name);
    ck.tensors_.push_back(std::move(t));
  }
  return ck;
}

}  // namespace shed
