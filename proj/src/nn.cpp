#include "novex/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "novex/errors.hpp"

namespace novex::nn {

namespace {

void apply_activation(Eigen::MatrixXd& values, Activation act) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      values = values.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      values = values.array().tanh().matrix();
      break;
  }
}

// Multiplies `grad` in place by the activation derivative, expressed through the
// post-activation values.
void apply_activation_grad(Eigen::MatrixXd& grad, const Eigen::MatrixXd& post, Activation act) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      grad = (post.array() > 0.0).select(grad, 0.0);
      break;
    case Activation::kTanh:
      grad = (grad.array() * (1.0 - post.array().square())).matrix();
      break;
  }
}

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "unknown";
}

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw ConfigError("weight snapshot truncated");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'N', 'V', 'X', 'W'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("DenseNet needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.bias.size() != layer.out_dim()) {
      throw ConfigError("DenseNet layer " + std::to_string(i) + ": bias size mismatch");
    }
    if (i + 1 < layers_.size() && layer.out_dim() != layers_[i + 1].in_dim()) {
      throw ConfigError("DenseNet layer " + std::to_string(i) + " out_dim does not chain");
    }
  }
}

DenseNet DenseNet::mlp(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden,
                       Eigen::Index out_dim, Activation output, Rng& rng) {
  std::vector<Eigen::Index> dims{in_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out_dim);
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const Eigen::Index fan_in = dims[i];
    const Eigen::Index fan_out = dims[i + 1];
    if (fan_in < 1 || fan_out < 1) throw ConfigError("DenseNet dimensions must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight(r, c) = uniform(rng, -limit, limit);
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation = (i + 2 == dims.size()) ? output : Activation::kRelu;
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

Eigen::Index DenseNet::in_dim() const { return layers_.front().in_dim(); }
Eigen::Index DenseNet::out_dim() const { return layers_.back().out_dim(); }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight || a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

GradientSet GradientSet::zeros_like(const DenseNet& net) {
  GradientSet g;
  for (const auto& l : net.layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

bool GradientSet::all_finite() const {
  for (const auto& w : weight) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : bias) {
    if (!b.allFinite()) return false;
  }
  return true;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& input) {
  Eigen::MatrixXd out = forward_batch(net, input);
  return out.col(0);
}

Eigen::MatrixXd forward_batch(const DenseNet& net, const Eigen::MatrixXd& inputs,
                              ForwardCache* cache) {
  if (inputs.rows() != net.in_dim()) {
    throw ConfigError("forward: input dim " + std::to_string(inputs.rows()) +
                      " != " + std::to_string(net.in_dim()));
  }
  if (cache) {
    cache->values.clear();
    cache->values.push_back(inputs);
  }
  Eigen::MatrixXd x = inputs;
  for (const auto& layer : net.layers()) {
    Eigen::MatrixXd z = layer.weight * x;
    z.colwise() += layer.bias;
    apply_activation(z, layer.activation);
    x = std::move(z);
    if (cache) cache->values.push_back(x);
  }
  return x;
}

GradientSet backward(const DenseNet& net, const Eigen::VectorXd& input,
                     const Eigen::VectorXd& output_grad) {
  ForwardCache cache;
  forward_batch(net, input, &cache);
  return backward_batch(net, cache, output_grad);
}

GradientSet backward_batch(const DenseNet& net, const ForwardCache& cache,
                           const Eigen::MatrixXd& output_grads, Eigen::MatrixXd* input_grad) {
  const auto& layers = net.layers();
  if (cache.values.size() != layers.size() + 1) {
    throw ConfigError("backward: forward cache does not match network");
  }
  if (output_grads.rows() != net.out_dim() || output_grads.cols() != cache.values[0].cols()) {
    throw ConfigError("backward: output gradient shape mismatch");
  }
  GradientSet grads = GradientSet::zeros_like(net);
  Eigen::MatrixXd delta = output_grads;
  for (std::size_t i = layers.size(); i-- > 0;) {
    apply_activation_grad(delta, cache.values[i + 1], layers[i].activation);
    grads.weight[i].noalias() = delta * cache.values[i].transpose();
    grads.bias[i] = delta.rowwise().sum();
    if (i > 0 || input_grad) {
      Eigen::MatrixXd upstream = layers[i].weight.transpose() * delta;
      delta = std::move(upstream);
    }
  }
  if (input_grad) *input_grad = std::move(delta);
  return grads;
}

MseResult mse_grad(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) throw ConfigError("mse_grad: length mismatch");
  if (pred.size() == 0) return {0.0, Eigen::VectorXd()};
  const Eigen::VectorXd diff = pred - target;
  const double n = static_cast<double>(pred.size());
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

RmsPropState RmsPropState::for_net(const DenseNet& net, double smoothing, double epsilon) {
  RmsPropState s;
  s.smoothing = smoothing;
  s.epsilon = epsilon;
  for (const auto& l : net.layers()) {
    s.weight_sq.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.bias_sq.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return s;
}

void rmsprop_step(DenseNet& net, const GradientSet& grads, RmsPropState& state, double lr) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || state.weight_sq.size() != layers.size()) {
    throw ConfigError("rmsprop_step: shape mismatch");
  }
  if (!(lr > 0.0)) throw ConfigError("rmsprop_step: learning rate must be positive");
  if (!grads.all_finite()) throw DivergenceError("rmsprop_step: non-finite gradient");
  const double a = state.smoothing;
  const double eps = state.epsilon;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& ws = state.weight_sq[i];
    auto& bs = state.bias_sq[i];
    ws = a * ws + (1.0 - a) * grads.weight[i].cwiseAbs2();
    bs = a * bs + (1.0 - a) * grads.bias[i].cwiseAbs2();
    layers[i].weight.array() -= lr * grads.weight[i].array() / (ws.array().sqrt() + eps);
    layers[i].bias.array() -= lr * grads.bias[i].array() / (bs.array().sqrt() + eps);
  }
}

void polyak_update(DenseNet& target, const DenseNet& online, double polyak) {
  if (!(polyak > 0.0 && polyak <= 1.0)) throw ConfigError("polyak must lie in (0, 1]");
  auto& tl = target.layers();
  const auto& ol = online.layers();
  if (tl.size() != ol.size()) throw ConfigError("polyak_update: shape mismatch");
  for (std::size_t i = 0; i < tl.size(); ++i) {
    if (polyak == 1.0) {
      tl[i].weight = ol[i].weight;
      tl[i].bias = ol[i].bias;
    } else {
      tl[i].weight = polyak * ol[i].weight + (1.0 - polyak) * tl[i].weight;
      tl[i].bias = polyak * ol[i].bias + (1.0 - polyak) * tl[i].bias;
    }
  }
}

void save_net(const DenseNet& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_dim()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_dim()));
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
  }
  for (const auto& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) write_le<double>(out, l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) write_le<double>(out, l.bias(r));
  }

  std::ofstream manifest(path.string() + ".manifest", std::ios::trunc);
  manifest << "format NVXW\nversion " << kVersion << "\nlayers " << net.layers().size() << "\n";
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& l = net.layers()[i];
    manifest << "layer " << i << " in " << l.in_dim() << " out " << l.out_dim() << " activation "
             << activation_name(l.activation) << "\n";
  }
  manifest << "parameters " << net.parameter_count() << "\n";
}

DenseNet load_net(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ConfigError(path.string() + ": not a weight snapshot");
  }
  if (read_le<std::uint32_t>(in) != kVersion) throw ConfigError("unsupported snapshot version");
  const auto n_layers = read_le<std::uint32_t>(in);
  std::vector<DenseLayer> layers(n_layers);
  for (auto& l : layers) {
    const auto in_dim = read_le<std::uint32_t>(in);
    const auto out_dim = read_le<std::uint32_t>(in);
    const auto act = read_le<std::uint8_t>(in);
    if (act > 2) throw ConfigError("unknown activation tag in snapshot");
    l.weight.resize(out_dim, in_dim);
    l.bias.resize(out_dim);
    l.activation = static_cast<Activation>(act);
  }
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = read_le<double>(in);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = read_le<double>(in);
  }
  return DenseNet(std::move(layers));
}

}  // namespace novex::nn
