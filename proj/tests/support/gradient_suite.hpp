#pragma once

// Finite-difference checks for every layer kind and every training loss.
// Each check builds its own network and data from `seed`, so a result is a
// pure function of the seed.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "support/gradcheck.hpp"
#include "tiyuntsong/agent.hpp"
#include "tiyuntsong/gem.hpp"
#include "tiyuntsong/neural.hpp"

namespace tiyuntsong::testing {

struct NamedCheck {
  std::string name;
  GradCheck result;
};

/// Entries within `margin` of zero are pushed out so that elementwise kinks
/// stay farther away than the finite-difference step.
inline nn::Tensor away_from_zero(nn::Tensor t, float margin = 0.05f) {
  for (auto& v : t.data())
    if (std::abs(v) < margin) v = v < 0 ? v - 2 * margin : v + 2 * margin;
  return t;
}

/// Loss = sum(c * net(x)) with the network in training mode.
inline GradCheck check_sequential(nn::Sequential net, const nn::Tensor& x, Rng& rng) {
  net.zero_grad();
  const nn::Tensor y = net.forward(x, nn::Mode::kTrain, /*update_stats=*/false);
  const nn::Tensor c = random_tensor(y.shape(), rng);
  const nn::Tensor dx = net.backward(c);
  auto params = net.params();
  const auto analytic = grads_of(params);
  auto loss = [&] { return weighted_sum(net.infer(x, nn::Mode::kTrain), c); };
  GradCheck out = check_params(loss, params, analytic, rng);
  out.merge(check_input([&](const nn::Tensor& xi) { return weighted_sum(net.infer(xi, nn::Mode::kTrain), c); }, x, dx));
  return out;
}

inline std::vector<NamedCheck> layer_checks(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x6c61796572ULL));
  std::vector<NamedCheck> out;
  {
    std::vector<nn::Layer> l;
    l.emplace_back(nn::Dense(7, 5, rng));
    out.push_back({"dense", check_sequential(nn::Sequential(std::move(l)), random_tensor({4, 7}, rng), rng)});
  }
  {
    std::vector<nn::Layer> l;
    l.emplace_back(nn::Conv1D(2, 3, 4, rng));
    out.push_back({"conv1d", check_sequential(nn::Sequential(std::move(l)), random_tensor({3, 2, 9}, rng), rng)});
  }
  {
    std::vector<nn::Layer> l;
    l.emplace_back(nn::Dense(6, 5, rng));
    l.emplace_back(nn::BatchNorm(5));
    out.push_back({"batchnorm", check_sequential(nn::Sequential(std::move(l)), random_tensor({8, 6}, rng), rng)});
  }
  const std::pair<const char*, nn::ActivationKind> kinds[] = {{"relu", nn::ActivationKind::kRelu},
                                                              {"leaky_relu", nn::ActivationKind::kLeakyRelu},
                                                              {"sigmoid", nn::ActivationKind::kSigmoid},
                                                              {"softmax", nn::ActivationKind::kSoftmax}};
  for (const auto& [name, kind] : kinds) {
    std::vector<nn::Layer> l;
    l.emplace_back(nn::Activation(kind));
    const nn::Tensor x = away_from_zero(random_tensor({3, 6}, rng, -3.0, 3.0));
    out.push_back({name, check_sequential(nn::Sequential(std::move(l)), x, rng)});
  }
  return out;
}

inline AgentConfig small_agent_config() {
  AgentConfig cfg;
  cfg.history_len = 8;
  cfg.levels = 6;
  return cfg;
}

inline std::vector<int> random_actions(std::size_t n, int levels, Rng& rng) {
  std::vector<int> a(n);
  for (auto& v : a) v = static_cast<int>(rng.index(static_cast<std::size_t>(levels)));
  return a;
}

inline std::vector<double> random_values(std::size_t n, Rng& rng, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// Entries probed per agent tensor; the agent's forward pass dominates the cost.
inline constexpr std::size_t kAgentProbes = 32;

/// Policy loss with a non-trivial entropy weight, and the value loss.
inline std::vector<NamedCheck> agent_checks(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x6167656e74ULL));
  const AgentConfig cfg = small_agent_config();
  AgentNet net(cfg, rng);
  const std::size_t batch = 6;
  const nn::Tensor x = random_tensor({batch, cfg.input_dim()}, rng, 0.0, 1.0);
  const auto actions = random_actions(batch, cfg.levels, rng);
  const auto adv = random_values(batch, rng, -1.0, 1.0);
  const auto targets = random_values(batch, rng, -1.0, 1.0);
  std::vector<NamedCheck> out;

  for (double beta : {0.0, 0.5}) {
    policy_gradient(net, x, actions, adv, beta);
    auto params = net.policy_params();
    const auto analytic = grads_of(params);
    auto loss = [&] { return policy_loss(net, x, actions, adv, beta); };
    out.push_back({beta == 0.0 ? "policy" : "policy_entropy", check_params(loss, params, analytic, rng, kAgentProbes)});
  }
  {
    const std::vector<double> zero(batch, 0.0);
    policy_gradient(net, x, actions, zero, 1.0);
    auto params = net.policy_params();
    const auto analytic = grads_of(params);
    auto loss = [&] { return policy_loss(net, x, actions, zero, 1.0); };
    out.push_back({"entropy", check_params(loss, params, analytic, rng, kAgentProbes)});
  }
  {
    value_gradient(net, x, targets);
    auto params = net.value_params();
    const auto analytic = grads_of(params);
    auto loss = [&] { return value_loss(net, x, targets); };
    out.push_back({"value", check_params(loss, params, analytic, rng, kAgentProbes)});
  }
  return out;
}

/// Both least-squares GEM objectives.
inline std::vector<NamedCheck> gem_checks(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x67656dULL));
  const std::size_t input_dim = 20;
  Generator g = make_generator(input_dim, rng);
  Discriminator d = make_discriminator(rng);
  const nn::Tensor winning = random_tensor({6, kHiddenSize}, rng);
  const nn::Tensor generated = random_tensor({6, kHiddenSize}, rng);
  const nn::Tensor inputs = random_tensor({6, input_dim}, rng, 0.0, 1.0);
  std::vector<NamedCheck> out;
  {
    d_loss_gradient(d, winning, generated);
    auto params = d.net.params();
    const auto analytic = grads_of(params);
    auto loss = [&] { return d_loss(d, winning, generated); };
    out.push_back({"d_loss", check_params(loss, params, analytic, rng)});
  }
  {
    g_loss_gradient(g, d, inputs);
    auto params = g.net.params();
    const auto analytic = grads_of(params);
    auto loss = [&] { return g_loss(g, d, inputs); };
    out.push_back({"g_loss", check_params(loss, params, analytic, rng)});
  }
  return out;
}

inline std::vector<NamedCheck> all_gradient_checks(std::uint64_t seed) {
  std::vector<NamedCheck> out = layer_checks(seed);
  for (auto& c : agent_checks(seed)) out.push_back(std::move(c));
  for (auto& c : gem_checks(seed)) out.push_back(std::move(c));
  return out;
}

}  // namespace tiyuntsong::testing
