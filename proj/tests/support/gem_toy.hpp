#pragma once

// Joint GEM training on a synthetic "winning" distribution: hidden features
// drawn from N(mu, 0.1^2) per coordinate around a fixed random mu. Success
// means the discriminator separates held-out winning rows from generated
// ones by more than 0.2 on average and the generator objective has dropped.

#include <cstdint>
#include <vector>

#include "tiyuntsong/gem.hpp"

namespace tiyuntsong::testing {

struct GemToyResult {
  double mean_score_winning = 0.0;
  double mean_score_generated = 0.0;
  double initial_g_loss = 0.0;
  double final_g_loss = 0.0;

  double separation() const { return mean_score_winning - mean_score_generated; }
  bool passed() const { return separation() > 0.2 && final_g_loss < initial_g_loss; }
};

inline GemToyResult run_gem_toy(std::uint64_t seed, int updates = 2000) {
  constexpr std::size_t kInputDim = 54;
  constexpr std::size_t kEvalRows = 256;
  constexpr double kSigma = 0.1;

  Rng target(12345);
  std::vector<double> mu(kHiddenSize);
  for (auto& m : mu) m = target.uniform(-1.0, 1.0);
  auto winning_row = [&](Rng& r) {
    std::vector<float> h(kHiddenSize);
    for (std::size_t i = 0; i < kHiddenSize; ++i) h[i] = static_cast<float>(mu[i] + kSigma * r.normal());
    return h;
  };

  Rng rng(seed);
  Generator g = make_generator(kInputDim, rng);
  Discriminator d = make_discriminator(rng);
  WinBuffer buffer(10000);
  for (int i = 0; i < 10000; ++i) buffer.push(winning_row(rng));
  nn::Tensor pool({2048, kInputDim});
  for (auto& v : pool.data()) v = static_cast<float>(rng.uniform());

  Rng eval_rng(999);
  nn::Tensor eval_inputs({kEvalRows, kInputDim});
  for (auto& v : eval_inputs.data()) v = static_cast<float>(eval_rng.uniform());
  nn::Tensor eval_winning({kEvalRows, kHiddenSize});
  for (std::size_t r = 0; r < kEvalRows; ++r) {
    const auto h = winning_row(eval_rng);
    std::copy(h.begin(), h.end(), eval_winning.ptr() + r * kHiddenSize);
  }

  GemToyResult out;
  out.initial_g_loss = g_loss(g, d, eval_inputs);
  nn::Optimizer g_opt = nn::Optimizer::rmsprop();
  nn::Optimizer d_opt = nn::Optimizer::rmsprop();
  const GemStepConfig cfg{1e-4, 1e-4, 64};
  for (int s = 0; s < updates; ++s) update_gem(g, d, buffer, pool, g_opt, d_opt, cfg, rng);

  const nn::Tensor win_scores = d.net.infer(eval_winning);
  const nn::Tensor gen_scores = d.net.infer(g.net.infer(eval_inputs));
  for (float v : win_scores.data()) out.mean_score_winning += v / static_cast<double>(kEvalRows);
  for (float v : gen_scores.data()) out.mean_score_generated += v / static_cast<double>(kEvalRows);
  out.final_g_loss = g_loss(g, d, eval_inputs);
  return out;
}

}  // namespace tiyuntsong::testing
