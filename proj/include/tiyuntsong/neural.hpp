#pragma once

// Small reverse-mode network core for fixed architectures: dense, 1-D
// convolution, batch normalization and elementwise activations, composed
// into Sequential stacks, plus Adam/RMSProp and checkpoint I/O.
//
// Layers cache what they need during forward() and accumulate parameter
// gradients during backward(); infer() is the side-effect-free path used for
// rollouts and can be called concurrently on a const network.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tiyuntsong/random.hpp"

namespace tiyuntsong::nn {

/// Row-major float tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, float fill = 0.0f);
  Tensor(std::vector<std::size_t> shape, std::vector<float> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }

  float* ptr() { return data_.data(); }
  const float* ptr() const { return data_.data(); }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  Tensor reshaped(std::vector<std::size_t> shape) const;
  void fill(float v);
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

enum class Mode { kTrain, kInfer };

/// y = x W^T + b; x is [B, in], W is [out, in].
class Dense {
 public:
  Dense(std::size_t in, std::size_t out);  // zero parameters
  Dense(std::size_t in, std::size_t out, Rng& rng);

  Tensor forward(const Tensor& x, Mode mode, bool update_stats = true);
  Tensor infer(const Tensor& x, Mode mode = Mode::kInfer) const;
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Param*>& out) { out.push_back(&weight_); out.push_back(&bias_); }
  void state(std::vector<Tensor*>& out) { out.push_back(&weight_.value); out.push_back(&bias_.value); }
  void state(std::vector<const Tensor*>& out) const { out.push_back(&weight_.value); out.push_back(&bias_.value); }
  nlohmann::json spec() const;
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }

 private:
  std::size_t in_, out_;
  Param weight_, bias_;
  Tensor input_;
};

/// Valid (unpadded) stride-1 convolution; x is [B, C, L], output is
/// [B, filters, L - kernel + 1].
class Conv1D {
 public:
  Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel);
  Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel, Rng& rng);

  Tensor forward(const Tensor& x, Mode mode, bool update_stats = true);
  Tensor infer(const Tensor& x, Mode mode = Mode::kInfer) const;
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Param*>& out) { out.push_back(&weight_); out.push_back(&bias_); }
  void state(std::vector<Tensor*>& out) { out.push_back(&weight_.value); out.push_back(&bias_.value); }
  void state(std::vector<const Tensor*>& out) const { out.push_back(&weight_.value); out.push_back(&bias_.value); }
  nlohmann::json spec() const;

 private:
  std::size_t channels_, filters_, kernel_;
  Param weight_, bias_;  // [filters, channels * kernel], [filters]
  Tensor input_;
};

/// Per-feature normalization of x [B, dim]. Training mode uses biased batch
/// statistics; running statistics follow r = momentum * r + (1 - momentum) * batch.
class BatchNorm {
 public:
  explicit BatchNorm(std::size_t dim, float momentum = 0.9f, float eps = 1e-5f);

  Tensor forward(const Tensor& x, Mode mode, bool update_stats = true);
  Tensor infer(const Tensor& x, Mode mode = Mode::kInfer) const;
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Param*>& out) { out.push_back(&gamma_); out.push_back(&beta_); }
  void state(std::vector<Tensor*>& out);
  void state(std::vector<const Tensor*>& out) const;
  nlohmann::json spec() const;

 private:
  struct Cache {
    Tensor x_hat;
    std::vector<float> inv_std;
    Mode mode = Mode::kInfer;
  };
  Tensor apply(const Tensor& x, Mode mode, Cache* cache, std::vector<float>* batch_mean,
               std::vector<float>* batch_var) const;

  std::size_t dim_;
  float momentum_, eps_;
  Param gamma_, beta_;
  Tensor running_mean_, running_var_;
  Cache cache_;
};

enum class ActivationKind { kRelu, kLeakyRelu, kSigmoid, kSoftmax };

/// Elementwise activation; softmax normalizes over the last axis of a rank-2 input.
class Activation {
 public:
  explicit Activation(ActivationKind kind, float slope = 0.2f) : kind_(kind), slope_(slope) {}

  Tensor forward(const Tensor& x, Mode mode, bool update_stats = true);
  Tensor infer(const Tensor& x, Mode mode = Mode::kInfer) const;
  Tensor backward(const Tensor& grad_out);

  void params(std::vector<Param*>&) {}
  void state(std::vector<Tensor*>&) {}
  void state(std::vector<const Tensor*>&) const {}
  nlohmann::json spec() const;
  ActivationKind kind() const { return kind_; }

 private:
  ActivationKind kind_;
  float slope_;
  Tensor input_, output_;
};

using Layer = std::variant<Dense, Conv1D, BatchNorm, Activation>;

class Sequential {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  Tensor forward(const Tensor& x, Mode mode, bool update_stats = true);
  Tensor infer(const Tensor& x, Mode mode = Mode::kInfer) const;
  /// Backpropagates through the last forward(); returns d loss / d input.
  Tensor backward(const Tensor& grad_out);

  std::vector<Param*> params();
  /// Parameters followed by non-trainable buffers, in a fixed order.
  std::vector<Tensor*> state();
  std::vector<const Tensor*> state() const;
  void zero_grad();

  nlohmann::json spec() const;
  /// Rebuilds the architecture with zeroed parameters.
  static Sequential from_spec(const nlohmann::json& spec);

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
  bool has_cache_ = false;
};

/// Row-wise softmax of [B, n] logits (max-shifted).
Tensor softmax_rows(const Tensor& logits);

struct LossGrad {
  double loss = 0.0;
  Tensor grad;  // d loss / d prediction
};

/// sum (p - t)^2
LossGrad sum_squared_error(const Tensor& prediction, const Tensor& target);
/// mean (p - t)^2
LossGrad mean_squared_error(const Tensor& prediction, const Tensor& target);

enum class OptimizerKind { kAdam, kRmsProp };

/// Adam (b1 0.9, b2 0.999, eps 1e-8, bias corrected) or RMSProp
/// (decay 0.9, eps 1e-8 inside the square root). Moment buffers are created
/// on the first step and must keep matching the parameter shapes.
class Optimizer {
 public:
  static Optimizer adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  static Optimizer rmsprop(double decay = 0.9, double eps = 1e-8);

  void step(std::span<Param* const> params, double lr);

  OptimizerKind kind() const { return kind_; }
  long steps() const { return t_; }

 private:
  Optimizer(OptimizerKind kind, double b1, double b2, double eps) : kind_(kind), b1_(b1), b2_(b2), eps_(eps) {}

  OptimizerKind kind_;
  double b1_, b2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Checkpoints: "TYTS" | u32 version | u64 header length | JSON header |
// little-endian float32 payload. The header lists every tensor shape.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointContents {
  nlohmann::json header;
  std::vector<Tensor> tensors;
};

/// Writes atomically (temporary file + rename).
void write_checkpoint(const std::filesystem::path& path, nlohmann::json header,
                      std::span<const Tensor* const> tensors);
/// Throws std::runtime_error on bad magic, version mismatch or truncation.
CheckpointContents read_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint tensors into `state`, checking count and shapes.
void assign_state(std::span<Tensor* const> state, std::span<const Tensor> tensors);

void save(const Sequential& net, const std::filesystem::path& path);
Sequential load_sequential(const std::filesystem::path& path);

}  // namespace tiyuntsong::nn
