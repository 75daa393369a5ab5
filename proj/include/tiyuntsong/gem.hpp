#pragma once

// GAN enhancement module: a generator that rolls a 16-dim hidden feature
// forward from the previous (state, hidden) pair, and a discriminator that
// scores whether a hidden feature looks like one from a won session. Both are
// trained with least-squares losses:
//
//   L_d = 1/2 E_win[(D(x) - 1)^2] + 1/2 E_gen[D(G(s, h))^2]
//   L_g = 1/2 E_gen[(D(G(s, h)) - 1)^2]

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "tiyuntsong/neural.hpp"
#include "tiyuntsong/simulator.hpp"

namespace tiyuntsong {

/// FC(64) -> BN -> LReLU -> FC(32) -> BN -> LReLU -> FC(16).
struct Generator {
  nn::Sequential net;
};

/// FC(64) -> BN -> LReLU -> FC(32) -> BN -> LReLU -> FC(1). The score is
/// unbounded; the least-squares targets are 1 for winning and 0 for generated.
struct Discriminator {
  nn::Sequential net;
};

Generator make_generator(std::size_t input_dim, Rng& rng);
Discriminator make_discriminator(Rng& rng);

/// h_0: zeros.
std::vector<float> init_hidden();

/// Inference-mode forward of one [s_prev | h_prev] row.
std::vector<float> gen_hidden(const Generator& g, std::span<const float> input);

/// Bounded FIFO of hidden features harvested from won sessions.
class WinBuffer {
 public:
  explicit WinBuffer(std::size_t capacity = 10000);

  void push(std::vector<float> hidden);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<std::vector<float>>& entries() const { return entries_; }

  /// `count` rows drawn uniformly with replacement, as [count, 16].
  nn::Tensor sample(Rng& rng, std::size_t count) const;

 private:
  std::size_t capacity_;
  std::deque<std::vector<float>> entries_;
};

/// Appends every step's h of a won trajectory.
void collect_winning(WinBuffer& buffer, const Trajectory& trajectory, bool won);

/// The discriminator scores winning and generated rows as one training-mode
/// batch, so both halves share batch statistics. The generator objective
/// sees D as a fixed function (running statistics). Both are side-effect
/// free. `generated` holds generator outputs, [B, 16].
double d_loss(const Discriminator& d, const nn::Tensor& winning, const nn::Tensor& generated);
double g_loss(const Generator& g, const Discriminator& d, const nn::Tensor& inputs);

/// Zero the trained network's gradients, accumulate d loss / d params
/// into them and return the loss. D's parameters and statistics are not
/// touched by g_loss_gradient.
double d_loss_gradient(Discriminator& d, const nn::Tensor& winning, const nn::Tensor& generated);
double g_loss_gradient(Generator& g, const Discriminator& d, const nn::Tensor& inputs);

struct GemReport {
  double d_loss = 0.0;
  double g_loss = 0.0;
  bool skipped = false;
};

struct GemStepConfig {
  double lr_generator = 1e-4;
  double lr_discriminator = 1e-4;
  std::size_t batch = 64;
};

/// One descent step on L_d (D only), then one on L_g (G only). `inputs`
/// holds candidate [s_prev | h_prev] rows; batches are drawn uniformly from
/// it and from the buffer. An empty buffer or input set is a no-op
/// (skipped = true); a non-finite loss aborts before any parameter write.
GemReport update_gem(Generator& g, Discriminator& d, const WinBuffer& buffer, const nn::Tensor& inputs,
                     nn::Optimizer& g_opt, nn::Optimizer& d_opt, const GemStepConfig& cfg, Rng& rng);

/// Rows `rows` of a rank-2 tensor.
nn::Tensor gather_rows(const nn::Tensor& t, std::span<const std::size_t> rows);

}  // namespace tiyuntsong
