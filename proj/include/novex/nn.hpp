#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "novex/random.hpp"

namespace novex::nn {

enum class Activation : std::uint8_t { kIdentity = 0, kRelu = 1, kTanh = 2 };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out_dim x in_dim
  Eigen::VectorXd bias;    // out_dim
  Activation activation = Activation::kIdentity;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
};

/// Fully connected network. The only trained parameters in the explorer.
class DenseNet {
 public:
  DenseNet() = default;
  /// Throws ConfigError unless consecutive layer dimensions chain.
  explicit DenseNet(std::vector<DenseLayer> layers);

  /// Rectifier hidden layers, uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
  static DenseNet mlp(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden,
                      Eigen::Index out_dim, Activation output, Rng& rng);

  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  bool operator==(const DenseNet& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Per-parameter arrays mirroring a DenseNet.
struct GradientSet {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  static GradientSet zeros_like(const DenseNet& net);
  bool all_finite() const;
  GradientSet& operator+=(const GradientSet& other);
};

/// Post-activation outputs of every layer for one batch; values[0] is the input.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> values;
};

Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& input);

/// Column-per-sample batch forward. Fills `cache` when given.
Eigen::MatrixXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& inputs,
                              ForwardCache* cache = nullptr);

/// Gradient of dot(output, output_grad) with respect to every parameter.
GradientSet backward(const DenseNet& net, const Eigen::VectorXd& input,
                     const Eigen::VectorXd& output_grad);

/// Batched backward over a cached forward pass; gradients are summed over columns.
/// Writes d(sum)/d(input) into `input_grad` when given.
GradientSet backward_batch(const DenseNet& net, const ForwardCache& cache,
                           const Eigen::MatrixXd& output_grads,
                           Eigen::MatrixXd* input_grad = nullptr);

struct MseResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

/// loss = mean squared difference, grad = 2 (pred - target) / n.
MseResult mse_grad(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

struct RmsPropState {
  std::vector<Eigen::MatrixXd> weight_sq;
  std::vector<Eigen::VectorXd> bias_sq;
  double smoothing = 0.99;
  double epsilon = 1e-8;

  static RmsPropState for_net(const DenseNet& net, double smoothing = 0.99, double epsilon = 1e-8);
};

/// One RMSProp update. Throws DivergenceError on a non-finite gradient, leaving net untouched.
void rmsprop_step(DenseNet& net, const GradientSet& grads, RmsPropState& state, double lr);

/// target <- polyak * online + (1 - polyak) * target. polyak == 1 is an exact copy.
void polyak_update(DenseNet& target, const DenseNet& online, double polyak);

/// Binary weight snapshot plus a `<path>.manifest` text sidecar.
///
/// Layout (all little-endian): magic "NVXW", u32 version (1), u32 layer count,
/// then per layer u32 in_dim, u32 out_dim, u8 activation; then for each layer
/// the weight matrix in row-major order followed by the bias, as f64.
void save_net(const DenseNet& net, const std::filesystem::path& path);
DenseNet load_net(const std::filesystem::path& path);

}  // namespace novex::nn
