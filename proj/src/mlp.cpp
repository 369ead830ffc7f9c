#include "shed/mlp.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>

#include "shed/errors.hpp"

namespace shed {

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::identity:
      break;
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::sigmoid:
      z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      break;
  }
}

// d act / d z, expressed through the pre-activation z and the output y.
Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& z,
                                      const Eigen::MatrixXd& y) {
  switch (act) {
    case Activation::identity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::relu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - y.array().square()).matrix();
    case Activation::sigmoid:
      return (y.array() * (1.0 - y.array())).matrix();
  }
  return {};
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, Activation hidden, Activation output)
    : sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
  if (sizes_.size() < 2) throw ConfigError("Mlp: need at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw ConfigError("Mlp: layer sizes must be positive");
  if (hidden_ != Activation::relu && hidden_ != Activation::tanh)
    throw ConfigError("Mlp: hidden activation must be relu or tanh");
  if (output_ == Activation::relu) throw ConfigError("Mlp: output activation must be identity, tanh or sigmoid");

  Eigen::Index total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Mlp Mlp::glorot(std::vector<int> layer_sizes, Activation hidden, Activation output,
                RandomStream& stream) {
  Mlp net(std::move(layer_sizes), hidden, output);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (net.sizes_[l] + net.sizes_[l + 1]));
    auto w = net.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = stream.uniform(-limit, limit);
  }
  return net;
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1], sizes_[layer]};
}
Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + weight_offset(layer), sizes_[layer + 1], sizes_[layer]};
}
Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), sizes_[layer + 1]};
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const {
  return forward_batch(input).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs, MlpCache* cache) const {
  if (inputs.rows() != input_size())
    throw ConfigError("Mlp: input has " + std::to_string(inputs.rows()) + " rows, expected " +
                      std::to_string(input_size()));
  if (cache) {
    cache->activations.assign(1, inputs);
    cache->pre_activations.clear();
  }
  Eigen::MatrixXd a = inputs;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    if (cache) cache->pre_activations.push_back(z);
    apply_activation(l + 1 == num_layers() ? output_ : hidden_, z);
    if (cache) cache->activations.push_back(z);
    a = std::move(z);
  }
  return a;
}

Eigen::VectorXd Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& upstream,
                              Eigen::MatrixXd* input_grad) const {
  if (cache.activations.size() != sizes_.size())
    throw ConfigError("Mlp: cache does not belong to this network");
  if (upstream.rows() != output_size() || upstream.cols() != cache.activations[0].cols())
    throw ConfigError("Mlp: upstream shape does not match output");

  Eigen::VectorXd grads = Eigen::VectorXd::Zero(params_.size());
  const int last = num_layers() - 1;
  Eigen::MatrixXd delta =
      upstream.cwiseProduct(activation_derivative(output_, cache.pre_activations[last],
                                                  cache.activations[last + 1]));
  for (int l = last; l >= 0; --l) {
    Eigen::Map<Eigen::MatrixXd> gw(grads.data() + weight_offset(l), sizes_[l + 1], sizes_[l]);
    Eigen::Map<Eigen::VectorXd> gb(grads.data() + bias_offset(l), sizes_[l + 1]);
    gw.noalias() = delta * cache.activations[l].transpose();
    gb = delta.rowwise().sum();
    if (l > 0 || input_grad) {
      Eigen::MatrixXd back = weight(l).transpose() * delta;
      if (l > 0) {
        delta = back.cwiseProduct(activation_derivative(hidden_, cache.pre_activations[l - 1],
                                                        cache.activations[l]));
      } else {
        *input_grad = std::move(back);
      }
    }
  }
  return grads;
}

std::uint64_t Mlp::parameter_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(params_.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(params_.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input) {
  return net.forward(input);
}

MlpGradient mlp_grad(const Mlp& net, const Eigen::VectorXd& input, const Eigen::VectorXd& upstream) {
  if (upstream.size() != net.output_size())
    throw ConfigError("mlp_grad: upstream length does not match output size");
  MlpCache cache;
  net.forward_batch(input, &cache);
  Eigen::MatrixXd input_grad;
  MlpGradient out;
  out.params = net.backward(cache, upstream, &input_grad);
  out.input = input_grad.col(0);
  return out;
}

}  // namespace shed
