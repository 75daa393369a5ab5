#pragma once

// Actor-critic agent. A shared feature trunk (one 1-D convolution branch per
// sequence feature plus a dense branch for the two scalars) feeds a policy
// head over ladder levels and a scalar value head.
//
// Normalized input layout, in order:
//   throughput[k] | download_time[k] | bitrate[k] | next_sizes[n] | hidden[16] |
//   remaining_play, buffer

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "tiyuntsong/gem.hpp"
#include "tiyuntsong/neural.hpp"
#include "tiyuntsong/random.hpp"
#include "tiyuntsong/simulator.hpp"
#include "tiyuntsong/workload.hpp"

namespace tiyuntsong {

enum class RewardMode {
  kEveryStep,  // match outcome repeated as r_t at every step
  kTerminal,   // match outcome on the last step only
};

struct AgentConfig {
  int history_len = 10;
  int levels = 6;
  double gamma = 0.6;
  double entropy_weight = 0.01;
  double lr_policy = 1e-4;
  double lr_value = 1e-3;
  double lr_gan = 1e-4;
  int n_step = 1;
  RewardMode reward_mode = RewardMode::kEveryStep;
  bool use_gem = true;
  double throughput_scale_kbps = 10000.0;
  double time_scale_s = 10.0;
  double size_scale_bits = 8e6;
  std::size_t win_buffer_capacity = 10000;
  std::size_t gan_batch = 64;

  void validate() const;
  std::size_t input_dim() const { return 3 * static_cast<std::size_t>(history_len) + levels + kHiddenSize + 2; }
};

nlohmann::json to_json(const AgentConfig& cfg);
AgentConfig agent_config_from_json(const nlohmann::json& j);

/// Per-session constants used to scale an observation.
struct NormalizationContext {
  double top_bitrate_kbps = 1.0;
  double buffer_capacity_s = 1.0;
  double video_duration_s = 1.0;
};

NormalizationContext normalization_context(const Manifest& manifest, const SessionConfig& session);

/// Flattens and scales an observation into the input layout above. Throws
/// ValidationError when the observation's lengths disagree with `cfg`.
std::vector<float> normalize(const Observation& obs, const AgentConfig& cfg, const NormalizationContext& ctx);

struct NetOutput {
  nn::Tensor logits;  // [B, levels]
  nn::Tensor values;  // [B, 1]
};

class AgentNet {
 public:
  AgentNet(const AgentConfig& cfg, Rng& rng);

  NetOutput infer(const nn::Tensor& inputs) const;
  /// Caches activations for backward_policy / backward_value.
  NetOutput forward(const nn::Tensor& inputs);
  /// Both accumulate into the trunk and the respective head.
  void backward_policy(const nn::Tensor& d_logits);
  void backward_value(const nn::Tensor& d_values);

  std::vector<nn::Param*> trunk_params();
  std::vector<nn::Param*> policy_params();  // trunk then policy head
  std::vector<nn::Param*> value_params();   // trunk then value head
  std::vector<nn::Tensor*> state();
  std::vector<const nn::Tensor*> state() const;
  void zero_grad();

  std::size_t input_dim() const { return input_dim_; }

 private:
  struct Branch {
    std::size_t offset = 0;
    std::size_t length = 0;
    bool sequence = true;  // conv over [B, 1, length]; else dense over [B, length]
    nn::Sequential net;
    std::size_t out_width = 0;
  };

  nn::Tensor slice(const nn::Tensor& inputs, const Branch& b) const;
  nn::Tensor merge(const std::vector<nn::Tensor>& parts, std::size_t batch) const;
  void backward_trunk(const nn::Tensor& d_features);

  std::size_t input_dim_ = 0;
  std::size_t feature_width_ = 0;
  std::vector<Branch> branches_;
  nn::Sequential policy_head_;
  nn::Sequential value_head_;
};

enum class ActMode { kSample, kGreedy };

/// Index of the largest logit; ties go to the lowest index.
int greedy_action(std::span<const float> logits);
/// Draws from softmax(logits) with one uniform variate.
int sample_action(std::span<const float> logits, Rng& rng);

/// w < 0.5: lr0 * (w ln w + 2); w >= 0.5: -lr0 * w ln w (0 ln 0 = 0).
/// Throws ValidationError for w outside [0, 1].
double dynamic_lr(double win_rate, double lr0);

/// n-step bootstrapped targets Q_t = sum_{i<m} gamma^i r_{t+i} + gamma^m V(s_{t+m}),
/// m = min(n, T - t), with V = 0 past the last step.
std::vector<double> td_targets(std::span<const double> rewards, std::span<const double> values, double gamma,
                               int n_step = 1);
/// Q_t - V(s_t).
std::vector<double> advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                               int n_step = 1);

/// Per-step rewards for one trajectory under `mode`.
std::vector<double> step_rewards(std::size_t steps, double outcome_reward, RewardMode mode);

/// Entropy of softmax(logits) in nats.
double entropy(std::span<const float> logits);

/// Mean over rows of -(log pi(a|s) A + beta H(pi(.|s))).
double policy_loss(const AgentNet& net, const nn::Tensor& inputs, std::span<const int> actions,
                   std::span<const double> adv, double beta);
/// Mean over rows of (target - V(s))^2.
double value_loss(const AgentNet& net, const nn::Tensor& inputs, std::span<const double> targets);

/// Zero the network's gradients, then accumulate d loss / d params into the
/// policy (resp. value) parameters. Return the loss.
double policy_gradient(AgentNet& net, const nn::Tensor& inputs, std::span<const int> actions,
                       std::span<const double> adv, double beta);
double value_gradient(AgentNet& net, const nn::Tensor& inputs, std::span<const double> targets);

struct Episode {
  std::vector<std::vector<float>> inputs;  // normalized observation per step
  std::vector<int> actions;
  std::vector<double> rewards;
};

Episode make_episode(const Trajectory& trajectory, double outcome_reward, const AgentConfig& cfg,
                     const NormalizationContext& ctx);

struct UpdateBatch {
  std::vector<Episode> episodes;
  double win_rate = 0.5;
};

struct LossReport {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  bool applied = false;
};

struct AgentOptimizers {
  nn::Optimizer policy = nn::Optimizer::adam();
  nn::Optimizer value = nn::Optimizer::adam();
  nn::Optimizer generator = nn::Optimizer::rmsprop();
  nn::Optimizer discriminator = nn::Optimizer::rmsprop();
};

class Agent {
 public:
  Agent(AgentConfig cfg, std::uint64_t seed);

  const AgentConfig& config() const { return cfg_; }
  AgentNet& net() { return net_; }
  const AgentNet& net() const { return net_; }
  Generator& generator() { return generator_; }
  const Generator& generator() const { return generator_; }
  Discriminator& discriminator() { return discriminator_; }
  const Discriminator& discriminator() const { return discriminator_; }
  WinBuffer& win_buffer() { return win_buffer_; }
  const WinBuffer& win_buffer() const { return win_buffer_; }

  std::vector<float> logits(std::span<const float> input) const;
  /// Softmax over levels, in double precision.
  std::vector<double> probabilities(std::span<const float> input) const;
  /// `rng` is required in sample mode and ignored in greedy mode.
  int act(std::span<const float> input, ActMode mode, Rng* rng) const;

  /// h for the next decision: zeros first, then the generator's output on
  /// the previous normalized observation (zeros throughout when GEM is off).
  HiddenProvider hidden_provider(const NormalizationContext& ctx) const;

  /// One full session. Read-only on the agent, so concurrent calls on a
  /// shared agent are safe.
  Trajectory play(const Manifest& manifest, const Trace& trace, const SessionConfig& session, ActMode mode,
                  std::uint64_t seed) const;
  Policy greedy_policy(const NormalizationContext& ctx) const;

  void save(const std::filesystem::path& path) const;
  static Agent load(const std::filesystem::path& path);

 private:
  AgentConfig cfg_;
  AgentNet net_;
  Generator generator_;
  Discriminator discriminator_;
  WinBuffer win_buffer_;
};

/// Actor-critic step: value gradients of the squared TD error and policy
/// gradients of the entropy-regularized objective are both taken at the
/// current parameters, then applied with rates dynamic_lr(win_rate, lr0).
/// A non-finite loss leaves every parameter untouched (applied = false).
LossReport update(Agent& agent, const UpdateBatch& batch, AgentOptimizers& opt);

}  // namespace tiyuntsong
