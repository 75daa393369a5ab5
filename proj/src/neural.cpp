#include "tiyuntsong/neural.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tiyuntsong::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXf>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXf>;

ConstMatMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatMap(t.ptr(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
MatMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatMap(t.ptr(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

[[noreturn]] void shape_error(const char* layer, const std::vector<std::size_t>& got, const std::string& want) {
  throw std::invalid_argument(std::string(layer) + ": input shape " + shape_string(got) + ", expected " + want);
}

Param make_param(std::string name, std::vector<std::size_t> shape) {
  Param p{std::move(name), Tensor(shape), Tensor(shape)};
  return p;
}

void uniform_init(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-limit, limit));
}

void require_cache(const Tensor& cache, const char* layer) {
  if (cache.size() == 0) throw std::logic_error(std::string(layer) + ": backward() without forward cache");
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, float fill) : shape_(std::move(shape)) {
  std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  data_.assign(n, fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  if (n != data_.size())
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                                shape_string(shape_));
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const { return Tensor(std::move(shape), data_); }

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

// ---- Dense ----

Dense::Dense(std::size_t in, std::size_t out)
    : in_(in), out_(out), weight_(make_param("weight", {out, in})), bias_(make_param("bias", {out})) {}

Dense::Dense(std::size_t in, std::size_t out, Rng& rng) : Dense(in, out) { uniform_init(weight_.value, in, rng); }

Tensor Dense::infer(const Tensor& x, Mode) const {
  if (x.rank() != 2 || x.dim(1) != in_) shape_error("dense", x.shape(), "[B," + std::to_string(in_) + "]");
  const std::size_t batch = x.dim(0);
  Tensor y({batch, out_});
  auto ym = as_matrix(y, batch, out_);
  ym.noalias() = as_matrix(x, batch, in_) * as_matrix(weight_.value, out_, in_).transpose();
  ym.rowwise() += ConstVecMap(bias_.value.ptr(), static_cast<Eigen::Index>(out_)).transpose();
  return y;
}

Tensor Dense::forward(const Tensor& x, Mode mode, bool) {
  Tensor y = infer(x, mode);
  input_ = x;
  return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
  require_cache(input_, "dense");
  const std::size_t batch = input_.dim(0);
  if (grad_out.shape() != std::vector<std::size_t>{batch, out_}) shape_error("dense backward", grad_out.shape(), "output shape");
  auto dy = as_matrix(grad_out, batch, out_);
  as_matrix(weight_.grad, out_, in_).noalias() += dy.transpose() * as_matrix(input_, batch, in_);
  VecMap(bias_.grad.ptr(), static_cast<Eigen::Index>(out_)) += dy.colwise().sum().transpose();
  Tensor dx({batch, in_});
  as_matrix(dx, batch, in_).noalias() = dy * as_matrix(weight_.value, out_, in_);
  return dx;
}

nlohmann::json Dense::spec() const { return {{"type", "dense"}, {"in", in_}, {"out", out_}}; }

// ---- Conv1D ----

Conv1D::Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel)
    : channels_(in_channels),
      filters_(filters),
      kernel_(kernel),
      weight_(make_param("weight", {filters, in_channels * kernel})),
      bias_(make_param("bias", {filters})) {
  if (kernel == 0) throw std::invalid_argument("conv1d: kernel must be positive");
}

Conv1D::Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel, Rng& rng)
    : Conv1D(in_channels, filters, kernel) {
  uniform_init(weight_.value, in_channels * kernel, rng);
}

namespace {
// Rows (b, p), columns (c, k): x[b, c, p + k].
RowMat im2col(const Tensor& x, std::size_t kernel) {
  const std::size_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
  const std::size_t out_len = length - kernel + 1;
  RowMat cols(static_cast<Eigen::Index>(batch * out_len), static_cast<Eigen::Index>(channels * kernel));
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t p = 0; p < out_len; ++p)
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t k = 0; k < kernel; ++k)
          cols(static_cast<Eigen::Index>(b * out_len + p), static_cast<Eigen::Index>(c * kernel + k)) =
              x[(b * channels + c) * length + p + k];
  return cols;
}
}  // namespace

Tensor Conv1D::infer(const Tensor& x, Mode) const {
  if (x.rank() != 3 || x.dim(1) != channels_ || x.dim(2) < kernel_)
    shape_error("conv1d", x.shape(), "[B," + std::to_string(channels_) + ",L>=" + std::to_string(kernel_) + "]");
  const std::size_t batch = x.dim(0), out_len = x.dim(2) - kernel_ + 1;
  RowMat rows = im2col(x, kernel_) * as_matrix(weight_.value, filters_, channels_ * kernel_).transpose();
  rows.rowwise() += ConstVecMap(bias_.value.ptr(), static_cast<Eigen::Index>(filters_)).transpose();
  Tensor y({batch, filters_, out_len});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t f = 0; f < filters_; ++f)
      for (std::size_t p = 0; p < out_len; ++p)
        y[(b * filters_ + f) * out_len + p] =
            rows(static_cast<Eigen::Index>(b * out_len + p), static_cast<Eigen::Index>(f));
  return y;
}

Tensor Conv1D::forward(const Tensor& x, Mode mode, bool) {
  Tensor y = infer(x, mode);
  input_ = x;
  return y;
}

Tensor Conv1D::backward(const Tensor& grad_out) {
  require_cache(input_, "conv1d");
  const std::size_t batch = input_.dim(0), length = input_.dim(2), out_len = length - kernel_ + 1;
  if (grad_out.shape() != std::vector<std::size_t>{batch, filters_, out_len})
    shape_error("conv1d backward", grad_out.shape(), "output shape");
  RowMat dy(static_cast<Eigen::Index>(batch * out_len), static_cast<Eigen::Index>(filters_));
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t f = 0; f < filters_; ++f)
      for (std::size_t p = 0; p < out_len; ++p)
        dy(static_cast<Eigen::Index>(b * out_len + p), static_cast<Eigen::Index>(f)) =
            grad_out[(b * filters_ + f) * out_len + p];
  const RowMat cols = im2col(input_, kernel_);
  const std::size_t width = channels_ * kernel_;
  as_matrix(weight_.grad, filters_, width).noalias() += dy.transpose() * cols;
  VecMap(bias_.grad.ptr(), static_cast<Eigen::Index>(filters_)) += dy.colwise().sum().transpose();
  const RowMat dcols = dy * as_matrix(weight_.value, filters_, width);
  Tensor dx(input_.shape());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t p = 0; p < out_len; ++p)
      for (std::size_t c = 0; c < channels_; ++c)
        for (std::size_t k = 0; k < kernel_; ++k)
          dx[(b * channels_ + c) * length + p + k] +=
              dcols(static_cast<Eigen::Index>(b * out_len + p), static_cast<Eigen::Index>(c * kernel_ + k));
  return dx;
}

nlohmann::json Conv1D::spec() const {
  return {{"type", "conv1d"}, {"in_channels", channels_}, {"filters", filters_}, {"kernel", kernel_}};
}

// ---- BatchNorm ----

BatchNorm::BatchNorm(std::size_t dim, float momentum, float eps)
    : dim_(dim),
      momentum_(momentum),
      eps_(eps),
      gamma_(make_param("gamma", {dim})),
      beta_(make_param("beta", {dim})),
      running_mean_({dim}, 0.0f),
      running_var_({dim}, 1.0f) {
  gamma_.value.fill(1.0f);
}

void BatchNorm::state(std::vector<Tensor*>& out) {
  out.push_back(&gamma_.value);
  out.push_back(&beta_.value);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

void BatchNorm::state(std::vector<const Tensor*>& out) const {
  out.push_back(&gamma_.value);
  out.push_back(&beta_.value);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

Tensor BatchNorm::apply(const Tensor& x, Mode mode, Cache* cache, std::vector<float>* batch_mean,
                        std::vector<float>* batch_var) const {
  if (x.rank() != 2 || x.dim(1) != dim_ || x.dim(0) == 0)
    shape_error("batchnorm", x.shape(), "[B>0," + std::to_string(dim_) + "]");
  const std::size_t batch = x.dim(0);
  std::vector<float> mean(dim_), var(dim_);
  if (mode == Mode::kTrain) {
    for (std::size_t j = 0; j < dim_; ++j) {
      double s = 0.0;
      for (std::size_t b = 0; b < batch; ++b) s += x.at(b, j);
      const double mu = s / static_cast<double>(batch);
      double ss = 0.0;
      for (std::size_t b = 0; b < batch; ++b) ss += (x.at(b, j) - mu) * (x.at(b, j) - mu);
      mean[j] = static_cast<float>(mu);
      var[j] = static_cast<float>(ss / static_cast<double>(batch));
    }
  } else {
    std::copy(running_mean_.data().begin(), running_mean_.data().end(), mean.begin());
    std::copy(running_var_.data().begin(), running_var_.data().end(), var.begin());
  }
  std::vector<float> inv_std(dim_);
  for (std::size_t j = 0; j < dim_; ++j) inv_std[j] = 1.0f / std::sqrt(var[j] + eps_);

  Tensor y(x.shape());
  Tensor x_hat(x.shape());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t j = 0; j < dim_; ++j) {
      const float h = (x.at(b, j) - mean[j]) * inv_std[j];
      x_hat.at(b, j) = h;
      y.at(b, j) = gamma_.value[j] * h + beta_.value[j];
    }
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
    cache->mode = mode;
  }
  if (batch_mean) *batch_mean = std::move(mean);
  if (batch_var) *batch_var = std::move(var);
  return y;
}

Tensor BatchNorm::infer(const Tensor& x, Mode mode) const { return apply(x, mode, nullptr, nullptr, nullptr); }

Tensor BatchNorm::forward(const Tensor& x, Mode mode, bool update_stats) {
  std::vector<float> mean, var;
  Tensor y = apply(x, mode, &cache_, &mean, &var);
  if (mode == Mode::kTrain && update_stats) {
    for (std::size_t j = 0; j < dim_; ++j) {
      running_mean_[j] = momentum_ * running_mean_[j] + (1.0f - momentum_) * mean[j];
      running_var_[j] = momentum_ * running_var_[j] + (1.0f - momentum_) * var[j];
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
  require_cache(cache_.x_hat, "batchnorm");
  const Tensor& xh = cache_.x_hat;
  if (grad_out.shape() != xh.shape()) shape_error("batchnorm backward", grad_out.shape(), "output shape");
  const std::size_t batch = xh.dim(0);
  Tensor dx(xh.shape());
  for (std::size_t j = 0; j < dim_; ++j) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      sum_dy += grad_out.at(b, j);
      sum_dy_xh += static_cast<double>(grad_out.at(b, j)) * xh.at(b, j);
    }
    gamma_.grad[j] += static_cast<float>(sum_dy_xh);
    beta_.grad[j] += static_cast<float>(sum_dy);
    const double scale = static_cast<double>(gamma_.value[j]) * cache_.inv_std[j];
    if (cache_.mode == Mode::kTrain) {
      const double n = static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b)
        dx.at(b, j) = static_cast<float>(scale / n * (n * grad_out.at(b, j) - sum_dy - xh.at(b, j) * sum_dy_xh));
    } else {
      for (std::size_t b = 0; b < batch; ++b) dx.at(b, j) = static_cast<float>(scale * grad_out.at(b, j));
    }
  }
  return dx;
}

nlohmann::json BatchNorm::spec() const {
  return {{"type", "batchnorm"}, {"dim", dim_}, {"momentum", momentum_}, {"eps", eps_}};
}

// ---- Activation ----

Tensor Activation::infer(const Tensor& x, Mode) const {
  if (kind_ == ActivationKind::kSoftmax) {
    if (x.rank() != 2) shape_error("softmax", x.shape(), "[B,n]");
    return softmax_rows(x);
  }
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float v = x[i];
    switch (kind_) {
      case ActivationKind::kRelu: y[i] = v > 0.0f ? v : 0.0f; break;
      case ActivationKind::kLeakyRelu: y[i] = v > 0.0f ? v : slope_ * v; break;
      case ActivationKind::kSigmoid: y[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v)))); break;
      case ActivationKind::kSoftmax: break;
    }
  }
  return y;
}

Tensor Activation::forward(const Tensor& x, Mode mode, bool) {
  Tensor y = infer(x, mode);
  input_ = x;
  output_ = y;
  return y;
}

Tensor Activation::backward(const Tensor& grad_out) {
  require_cache(input_, "activation");
  if (grad_out.shape() != input_.shape()) shape_error("activation backward", grad_out.shape(), "output shape");
  Tensor dx(input_.shape());
  switch (kind_) {
    case ActivationKind::kRelu:
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = input_[i] > 0.0f ? grad_out[i] : 0.0f;
      break;
    case ActivationKind::kLeakyRelu:
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = input_[i] > 0.0f ? grad_out[i] : slope_ * grad_out[i];
      break;
    case ActivationKind::kSigmoid:
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = grad_out[i] * output_[i] * (1.0f - output_[i]);
      break;
    case ActivationKind::kSoftmax: {
      const std::size_t rows = dx.dim(0), cols = dx.dim(1);
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += static_cast<double>(grad_out.at(r, c)) * output_.at(r, c);
        for (std::size_t c = 0; c < cols; ++c)
          dx.at(r, c) = static_cast<float>(output_.at(r, c) * (grad_out.at(r, c) - dot));
      }
      break;
    }
  }
  return dx;
}

nlohmann::json Activation::spec() const {
  switch (kind_) {
    case ActivationKind::kRelu: return {{"type", "activation"}, {"kind", "relu"}};
    case ActivationKind::kLeakyRelu: return {{"type", "activation"}, {"kind", "leaky_relu"}, {"slope", slope_}};
    case ActivationKind::kSigmoid: return {{"type", "activation"}, {"kind", "sigmoid"}};
    case ActivationKind::kSoftmax: return {{"type", "activation"}, {"kind", "softmax"}};
  }
  return {};
}

// ---- Sequential ----

Tensor Sequential::forward(const Tensor& x, Mode mode, bool update_stats) {
  Tensor h = x;
  for (auto& layer : layers_) h = std::visit([&](auto& l) { return l.forward(h, mode, update_stats); }, layer);
  if (!h.all_finite()) throw std::runtime_error("network produced a non-finite output");
  has_cache_ = true;
  return h;
}

Tensor Sequential::infer(const Tensor& x, Mode mode) const {
  Tensor h = x;
  for (const auto& layer : layers_) h = std::visit([&](const auto& l) { return l.infer(h, mode); }, layer);
  if (!h.all_finite()) throw std::runtime_error("network produced a non-finite output");
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  if (!has_cache_) throw std::logic_error("sequential: backward() without forward cache");
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    g = std::visit([&](auto& l) { return l.backward(g); }, *it);
  return g;
}

std::vector<Param*> Sequential::params() {
  std::vector<Param*> out;
  for (auto& layer : layers_) std::visit([&](auto& l) { l.params(out); }, layer);
  return out;
}

std::vector<Tensor*> Sequential::state() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) std::visit([&](auto& l) { l.state(out); }, layer);
  return out;
}

std::vector<const Tensor*> Sequential::state() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : layers_) std::visit([&](const auto& l) { l.state(out); }, layer);
  return out;
}

void Sequential::zero_grad() {
  for (Param* p : params()) p->grad.fill(0.0f);
}

nlohmann::json Sequential::spec() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) layers.push_back(std::visit([](const auto& l) { return l.spec(); }, layer));
  return {{"type", "sequential"}, {"layers", std::move(layers)}};
}

Sequential Sequential::from_spec(const nlohmann::json& spec) {
  try {
    if (spec.at("type") != "sequential") throw std::runtime_error("not a sequential spec");
    std::vector<Layer> layers;
    for (const auto& l : spec.at("layers")) {
      const std::string type = l.at("type");
      if (type == "dense") {
        layers.emplace_back(Dense(l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>()));
      } else if (type == "conv1d") {
        layers.emplace_back(Conv1D(l.at("in_channels").get<std::size_t>(), l.at("filters").get<std::size_t>(),
                                   l.at("kernel").get<std::size_t>()));
      } else if (type == "batchnorm") {
        layers.emplace_back(BatchNorm(l.at("dim").get<std::size_t>(), l.at("momentum").get<float>(),
                                      l.at("eps").get<float>()));
      } else if (type == "activation") {
        const std::string kind = l.at("kind");
        if (kind == "relu") layers.emplace_back(Activation(ActivationKind::kRelu));
        else if (kind == "leaky_relu") layers.emplace_back(Activation(ActivationKind::kLeakyRelu, l.at("slope").get<float>()));
        else if (kind == "sigmoid") layers.emplace_back(Activation(ActivationKind::kSigmoid));
        else if (kind == "softmax") layers.emplace_back(Activation(ActivationKind::kSoftmax));
        else throw std::runtime_error("unknown activation '" + kind + "'");
      } else {
        throw std::runtime_error("unknown layer type '" + type + "'");
      }
    }
    return Sequential(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed network spec: ") + e.what());
  }
}

// ---- helpers and losses ----

Tensor softmax_rows(const Tensor& logits) {
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  Tensor p(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    float mx = logits.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, logits.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(static_cast<double>(logits.at(r, c) - mx));
    for (std::size_t c = 0; c < cols; ++c)
      p.at(r, c) = static_cast<float>(std::exp(static_cast<double>(logits.at(r, c) - mx)) / z);
  }
  return p;
}

LossGrad sum_squared_error(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) throw std::invalid_argument("squared error: shape mismatch");
  LossGrad out{0.0, Tensor(prediction.shape())};
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction[i]) - target[i];
    out.loss += d * d;
    out.grad[i] = static_cast<float>(2.0 * d);
  }
  return out;
}

LossGrad mean_squared_error(const Tensor& prediction, const Tensor& target) {
  LossGrad out = sum_squared_error(prediction, target);
  const double n = static_cast<double>(std::max<std::size_t>(prediction.size(), 1));
  out.loss /= n;
  for (auto& g : out.grad.data()) g = static_cast<float>(g / n);
  return out;
}

// ---- optimizers ----

Optimizer Optimizer::adam(double beta1, double beta2, double eps) {
  return Optimizer(OptimizerKind::kAdam, beta1, beta2, eps);
}

Optimizer Optimizer::rmsprop(double decay, double eps) { return Optimizer(OptimizerKind::kRmsProp, decay, 0.0, eps); }

void Optimizer::step(std::span<Param* const> params, double lr) {
  if (m_.empty() && v_.empty()) {
    for (const Param* p : params) {
      if (kind_ == OptimizerKind::kAdam) m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }
  if (v_.size() != params.size()) throw std::invalid_argument("optimizer: parameter count changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->grad.shape() != params[i]->value.shape() || v_[i].size() != params[i]->value.size())
      throw std::invalid_argument("optimizer: shape mismatch for parameter '" + params[i]->name + "'");
  }
  ++t_;
  if (kind_ == OptimizerKind::kAdam) {
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto value = params[i]->value.data();
      auto grad = params[i]->grad.data();
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < value.size(); ++j) {
        const double g = grad[j];
        m[j] = b1_ * m[j] + (1.0 - b1_) * g;
        v[j] = b2_ * v[j] + (1.0 - b2_) * g * g;
        const double step = lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
        value[j] = static_cast<float>(value[j] - step);
      }
    }
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto value = params[i]->value.data();
      auto grad = params[i]->grad.data();
      auto& v = v_[i];
      for (std::size_t j = 0; j < value.size(); ++j) {
        const double g = grad[j];
        v[j] = b1_ * v[j] + (1.0 - b1_) * g * g;
        value[j] = static_cast<float>(value[j] - lr * g / std::sqrt(v[j] + eps_));
      }
    }
  }
}

}  // namespace tiyuntsong::nn
