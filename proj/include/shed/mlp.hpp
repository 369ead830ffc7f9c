#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "shed/rng.hpp"

namespace shed {

enum class Activation { identity, relu, tanh, sigmoid };

/// Intermediate values kept by a batched forward pass for backprop.
/// activations[0] is the input batch; activations[l] the output of layer l.
struct MlpCache {
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> pre_activations;
};

/// Fully connected feed-forward network. All weights and biases live in one
/// flat parameter vector: for each layer, the out x in weight matrix
/// (column-major) followed by the bias vector.
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized network.
  Mlp(std::vector<int> layer_sizes, Activation hidden, Activation output);

  /// Glorot-uniform weights, zero biases.
  static Mlp glorot(std::vector<int> layer_sizes, Activation hidden, Activation output,
                    RandomStream& stream);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index parameter_count() const { return params_.size(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }

  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

  /// Columns of `inputs` are samples.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, MlpCache* cache = nullptr) const;

  /// Gradient of sum_j upstream.col(j) . output.col(j) with respect to the
  /// parameters. If `input_grad` is given it receives the gradient with respect
  /// to each input column.
  Eigen::VectorXd backward(const MlpCache& cache, const Eigen::MatrixXd& upstream,
                           Eigen::MatrixXd* input_grad = nullptr) const;

  bool all_finite() const { return params_.allFinite(); }

  /// FNV-1a over the raw parameter bytes.
  std::uint64_t parameter_hash() const;

 private:
  Eigen::Index weight_offset(int layer) const { return offsets_[layer]; }
  Eigen::Index bias_offset(int layer) const {
    return offsets_[layer] + static_cast<Eigen::Index>(sizes_[layer + 1]) * sizes_[layer];
  }

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
  Eigen::VectorXd params_;
};

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input);

struct MlpGradient {
  Eigen::VectorXd params;
  Eigen::VectorXd input;
};

/// Exact backprop of upstream . net(input).
MlpGradient mlp_grad(const Mlp& net, const Eigen::VectorXd& input, const Eigen::VectorXd& upstream);

}  // namespace shed
