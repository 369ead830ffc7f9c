#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "shed/adam.hpp"
#include "shed/mlp.hpp"

namespace shed {

/// Checkpoints are two files: `<stem>.bin` holds every tensor as contiguous
/// little-endian float64 in declaration order, `<stem>.json` lists name,
/// shape and offset (in elements) of each tensor plus free-form metadata.
struct NamedTensor {
  std::string name;
  std::vector<long> shape;
  Eigen::VectorXd data;
};

class Checkpoint {
 public:
  void add(NamedTensor t);
  void add_mlp(const std::string& prefix, const Mlp& net);
  void add_adam(const std::string& prefix, const AdamState& state);

  /// Throws ConfigError if the tensor is missing or shapes differ.
  const NamedTensor& get(const std::string& name) const;
  void load_mlp(const std::string& prefix, Mlp& net) const;
  void load_adam(const std::string& prefix, AdamState& state) const;

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }
  const std::vector<NamedTensor>& tensors() const { return tensors_; }

  void write(const std::filesystem::path& stem) const;
  static Checkpoint read(const std::filesystem::path& stem);

 private:
  std::vector<NamedTensor> tensors_;
  nlohmann::json meta_ = nlohmann::json::object();
};

}  // namespace shed
