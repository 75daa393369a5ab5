#include "tiyuntsong/gem.hpp"

#include <cmath>
#include <stdexcept>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

using nn::Activation;
using nn::ActivationKind;
using nn::BatchNorm;
using nn::Dense;
using nn::Mode;
using nn::Tensor;

Generator make_generator(std::size_t input_dim, Rng& rng) {
  std::vector<nn::Layer> layers;
  layers.emplace_back(Dense(input_dim, 64, rng));
  layers.emplace_back(BatchNorm(64));
  layers.emplace_back(Activation(ActivationKind::kLeakyRelu));
  layers.emplace_back(Dense(64, 32, rng));
  layers.emplace_back(BatchNorm(32));
  layers.emplace_back(Activation(ActivationKind::kLeakyRelu));
  layers.emplace_back(Dense(32, kHiddenSize, rng));
  return {nn::Sequential(std::move(layers))};
}

Discriminator make_discriminator(Rng& rng) {
  std::vector<nn::Layer> layers;
  layers.emplace_back(Dense(kHiddenSize, 64, rng));
  layers.emplace_back(BatchNorm(64));
  layers.emplace_back(Activation(ActivationKind::kLeakyRelu));
  layers.emplace_back(Dense(64, 32, rng));
  layers.emplace_back(BatchNorm(32));
  layers.emplace_back(Activation(ActivationKind::kLeakyRelu));
  layers.emplace_back(Dense(32, 1, rng));
  return {nn::Sequential(std::move(layers))};
}

std::vector<float> init_hidden() { return std::vector<float>(kHiddenSize, 0.0f); }

std::vector<float> gen_hidden(const Generator& g, std::span<const float> input) {
  Tensor x({1, input.size()}, std::vector<float>(input.begin(), input.end()));
  Tensor h = g.net.infer(x, Mode::kInfer);
  if (h.size() != kHiddenSize) throw std::invalid_argument("generator must emit 16 features");
  return {h.data().begin(), h.data().end()};
}

WinBuffer::WinBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("win buffer capacity must be positive");
}

void WinBuffer::push(std::vector<float> hidden) {
  if (hidden.size() != kHiddenSize) throw ValidationError("win buffer entries must have length 16");
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(hidden));
}

Tensor WinBuffer::sample(Rng& rng, std::size_t count) const {
  if (entries_.empty()) throw std::logic_error("sampling an empty win buffer");
  Tensor out({count, kHiddenSize});
  for (std::size_t r = 0; r < count; ++r) {
    const auto& e = entries_[rng.index(entries_.size())];
    std::copy(e.begin(), e.end(), out.ptr() + r * kHiddenSize);
  }
  return out;
}

void collect_winning(WinBuffer& buffer, const Trajectory& trajectory, bool won) {
  if (!won) return;
  for (const auto& step : trajectory.steps) {
    const auto& h = step.observation.hidden;
    buffer.push(std::vector<float>(h.begin(), h.end()));
  }
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows) {
  const std::size_t width = t.dim(1);
  Tensor out({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(t.ptr() + rows[i] * width, t.ptr() + (rows[i] + 1) * width, out.ptr() + i * width);
  return out;
}

namespace {

void require_batch(const Tensor& t, const char* what) {
  if (t.rank() != 2 || t.dim(0) == 0) throw ValidationError(std::string(what) + ": empty batch");
}

double mean_sq(const Tensor& p, double target) {
  double s = 0.0;
  for (float v : p.data()) s += (v - target) * (v - target);
  return s / static_cast<double>(p.size());
}

// d/dp of 1/2 mean (p - target)^2.
Tensor half_mse_grad(const Tensor& p, double target) {
  Tensor g(p.shape());
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = static_cast<float>((p[i] - target) / n);
  return g;
}

}  // namespace

namespace {

// [winning; generated] as one batch so that batch statistics are shared.
Tensor stack_rows(const Tensor& top, const Tensor& bottom) {
  if (top.dim(1) != bottom.dim(1)) throw ValidationError("stacked batches differ in width");
  Tensor out({top.dim(0) + bottom.dim(0), top.dim(1)});
  std::copy(top.data().begin(), top.data().end(), out.ptr());
  std::copy(bottom.data().begin(), bottom.data().end(), out.ptr() + top.size());
  return out;
}

struct JointLoss {
  double loss = 0.0;
  Tensor grad;
};

// 1/2 mean over the first `wins` rows of (p - 1)^2 + 1/2 mean over the rest of p^2.
JointLoss joint_d_loss(const Tensor& p, std::size_t wins) {
  const std::size_t gens = p.dim(0) - wins;
  JointLoss out{0.0, Tensor(p.shape())};
  for (std::size_t i = 0; i < p.dim(0); ++i) {
    const bool win = i < wins;
    const double target = win ? 1.0 : 0.0;
    const double n = static_cast<double>(win ? wins : gens);
    out.loss += 0.5 * (p[i] - target) * (p[i] - target) / n;
    out.grad[i] = static_cast<float>((p[i] - target) / n);
  }
  return out;
}

}  // namespace

double d_loss(const Discriminator& d, const Tensor& winning, const Tensor& generated) {
  require_batch(winning, "d_loss");
  require_batch(generated, "d_loss");
  return joint_d_loss(d.net.infer(stack_rows(winning, generated), Mode::kTrain), winning.dim(0)).loss;
}

double g_loss(const Generator& g, const Discriminator& d, const Tensor& inputs) {
  require_batch(inputs, "g_loss");
  return 0.5 * mean_sq(d.net.infer(g.net.infer(inputs, Mode::kTrain), Mode::kInfer), 1.0);
}

double d_loss_gradient(Discriminator& d, const Tensor& winning, const Tensor& generated) {
  require_batch(winning, "d_loss");
  require_batch(generated, "d_loss");
  d.net.zero_grad();
  const Tensor p = d.net.forward(stack_rows(winning, generated), Mode::kTrain);
  JointLoss l = joint_d_loss(p, winning.dim(0));
  d.net.backward(l.grad);
  return l.loss;
}

double g_loss_gradient(Generator& g, const Discriminator& d, const Tensor& inputs) {
  require_batch(inputs, "g_loss");
  g.net.zero_grad();
  Tensor h = g.net.forward(inputs, Mode::kTrain);
  // D is a fixed function here: running statistics, no stat updates.
  Discriminator frozen = d;
  Tensor p = frozen.net.forward(h, Mode::kInfer, /*update_stats=*/false);
  const double loss = 0.5 * mean_sq(p, 1.0);
  g.net.backward(frozen.net.backward(half_mse_grad(p, 1.0)));
  return loss;
}

GemReport update_gem(Generator& g, Discriminator& d, const WinBuffer& buffer, const Tensor& inputs,
                     nn::Optimizer& g_opt, nn::Optimizer& d_opt, const GemStepConfig& cfg, Rng& rng) {
  GemReport report;
  if (buffer.empty() || inputs.rank() != 2 || inputs.dim(0) == 0) {
    report.skipped = true;
    return report;
  }
  std::vector<std::size_t> rows(cfg.batch);
  for (auto& r : rows) r = rng.index(inputs.dim(0));
  const Tensor batch = gather_rows(inputs, rows);
  const Tensor winning = buffer.sample(rng, cfg.batch);

  // D step on detached generator output.
  const Tensor generated = g.net.infer(batch, Mode::kTrain);
  report.d_loss = d_loss_gradient(d, winning, generated);
  if (!std::isfinite(report.d_loss)) {
    d.net.zero_grad();
    report.skipped = true;
    return report;
  }
  d_opt.step(d.net.params(), cfg.lr_discriminator);
  d.net.zero_grad();

  report.g_loss = g_loss_gradient(g, d, batch);
  if (!std::isfinite(report.g_loss)) {
    g.net.zero_grad();
    report.skipped = true;
    return report;
  }
  g_opt.step(g.net.params(), cfg.lr_generator);
  g.net.zero_grad();
  return report;
}

}  // namespace tiyuntsong
