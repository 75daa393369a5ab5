#include "tiyuntsong/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

using nn::Activation;
using nn::ActivationKind;
using nn::Mode;
using nn::Tensor;

namespace {

constexpr std::size_t kFilters = 64;
constexpr std::size_t kHeadWidth = 64;

const char* reward_mode_name(RewardMode m) { return m == RewardMode::kEveryStep ? "every_step" : "terminal"; }

RewardMode parse_reward_mode(const std::string& s) {
  if (s == "every_step") return RewardMode::kEveryStep;
  if (s == "terminal") return RewardMode::kTerminal;
  throw ValidationError("reward_mode must be \"every_step\" or \"terminal\", got \"" + s + "\"");
}

Tensor to_row(std::span<const float> input) {
  return Tensor({1, input.size()}, std::vector<float>(input.begin(), input.end()));
}

// log softmax of one row, in double.
std::vector<double> log_softmax(std::span<const float> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (float v : logits) z += std::exp(v - top);
  const double log_z = top + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) out[j] = logits[j] - log_z;
  return out;
}

std::span<const float> row(const Tensor& t, std::size_t r) { return {t.ptr() + r * t.dim(1), t.dim(1)}; }

void check_batch(const Tensor& inputs, std::size_t rows, const char* what) {
  if (inputs.rank() != 2 || inputs.dim(0) == 0) throw ValidationError(std::string(what) + ": empty batch");
  if (rows != inputs.dim(0)) throw ValidationError(std::string(what) + ": per-row data does not match batch size");
}

}  // namespace

// ---- AgentConfig ----

void AgentConfig::validate() const {
  if (history_len < 1) throw ValidationError("history_len must be >= 1");
  if (levels < 1) throw ValidationError("levels must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
  if (!(entropy_weight >= 0.0)) throw ValidationError("entropy_weight must be >= 0");
  if (!(lr_policy > 0.0) || !(lr_value > 0.0) || !(lr_gan > 0.0))
    throw ValidationError("learning rates must be positive");
  if (n_step < 1) throw ValidationError("n_step must be >= 1");
  if (!(throughput_scale_kbps > 0.0) || !(time_scale_s > 0.0) || !(size_scale_bits > 0.0))
    throw ValidationError("normalization scales must be positive");
  if (win_buffer_capacity < 1) throw ValidationError("win_buffer_capacity must be >= 1");
  if (gan_batch < 1) throw ValidationError("gan_batch must be >= 1");
}

nlohmann::json to_json(const AgentConfig& c) {
  return {{"history_len", c.history_len},
          {"levels", c.levels},
          {"gamma", c.gamma},
          {"entropy_weight", c.entropy_weight},
          {"lr_policy", c.lr_policy},
          {"lr_value", c.lr_value},
          {"lr_gan", c.lr_gan},
          {"n_step", c.n_step},
          {"reward_mode", reward_mode_name(c.reward_mode)},
          {"use_gem", c.use_gem},
          {"throughput_scale_kbps", c.throughput_scale_kbps},
          {"time_scale_s", c.time_scale_s},
          {"size_scale_bits", c.size_scale_bits},
          {"win_buffer_capacity", c.win_buffer_capacity},
          {"gan_batch", c.gan_batch}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("agent config must be a JSON object");
  AgentConfig c;
  try {
    c.history_len = j.value("history_len", c.history_len);
    c.levels = j.value("levels", c.levels);
    c.gamma = j.value("gamma", c.gamma);
    c.entropy_weight = j.value("entropy_weight", c.entropy_weight);
    c.lr_policy = j.value("lr_policy", c.lr_policy);
    c.lr_value = j.value("lr_value", c.lr_value);
    c.lr_gan = j.value("lr_gan", c.lr_gan);
    c.n_step = j.value("n_step", c.n_step);
    c.reward_mode = parse_reward_mode(j.value("reward_mode", std::string(reward_mode_name(c.reward_mode))));
    c.use_gem = j.value("use_gem", c.use_gem);
    c.throughput_scale_kbps = j.value("throughput_scale_kbps", c.throughput_scale_kbps);
    c.time_scale_s = j.value("time_scale_s", c.time_scale_s);
    c.size_scale_bits = j.value("size_scale_bits", c.size_scale_bits);
    c.win_buffer_capacity = j.value("win_buffer_capacity", c.win_buffer_capacity);
    c.gan_batch = j.value("gan_batch", c.gan_batch);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("agent config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---- normalization ----

NormalizationContext normalization_context(const Manifest& manifest, const SessionConfig& session) {
  return {manifest.ladder_kbps().back(), session.buffer_capacity_s, manifest.total_duration_s()};
}

std::vector<float> normalize(const Observation& obs, const AgentConfig& cfg, const NormalizationContext& ctx) {
  const auto k = static_cast<std::size_t>(cfg.history_len);
  const auto n = static_cast<std::size_t>(cfg.levels);
  if (obs.throughput_kbps.size() != k || obs.download_time_s.size() != k || obs.bitrate_kbps.size() != k)
    throw ValidationError("observation history length does not match history_len " + std::to_string(k));
  if (obs.next_sizes_bits.size() != n)
    throw ValidationError("observation has " + std::to_string(obs.next_sizes_bits.size()) +
                          " next chunk sizes, agent expects " + std::to_string(n) + " levels");
  if (obs.hidden.size() != kHiddenSize) throw ValidationError("observation hidden feature must have length 16");

  std::vector<float> out;
  out.reserve(cfg.input_dim());
  for (double v : obs.throughput_kbps) out.push_back(static_cast<float>(v / cfg.throughput_scale_kbps));
  for (double v : obs.download_time_s) out.push_back(static_cast<float>(v / cfg.time_scale_s));
  for (double v : obs.bitrate_kbps) out.push_back(static_cast<float>(v / ctx.top_bitrate_kbps));
  for (double v : obs.next_sizes_bits) out.push_back(static_cast<float>(v / cfg.size_scale_bits));
  for (double v : obs.hidden) out.push_back(static_cast<float>(v));
  out.push_back(static_cast<float>(obs.remaining_play_s / ctx.video_duration_s));
  out.push_back(static_cast<float>(obs.buffer_s / ctx.buffer_capacity_s));
  return out;
}

// ---- AgentNet ----

AgentNet::AgentNet(const AgentConfig& cfg, Rng& rng) : input_dim_(cfg.input_dim()) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.history_len);
  const auto n = static_cast<std::size_t>(cfg.levels);
  const std::size_t spans[][2] = {{0, k}, {k, k}, {2 * k, k}, {3 * k, n}, {3 * k + n, kHiddenSize}};
  for (const auto& s : spans) {
    Branch b;
    b.offset = s[0];
    b.length = s[1];
    const std::size_t kernel = std::min<std::size_t>(3, b.length);
    std::vector<nn::Layer> layers;
    layers.emplace_back(nn::Conv1D(1, kFilters, kernel, rng));
    layers.emplace_back(Activation(ActivationKind::kRelu));
    b.net = nn::Sequential(std::move(layers));
    b.out_width = kFilters * (b.length - kernel + 1);
    branches_.push_back(std::move(b));
  }
  Branch scalars;
  scalars.offset = 3 * k + n + kHiddenSize;
  scalars.length = 2;
  scalars.sequence = false;
  std::vector<nn::Layer> layers;
  layers.emplace_back(nn::Dense(2, kFilters, rng));
  layers.emplace_back(Activation(ActivationKind::kRelu));
  scalars.net = nn::Sequential(std::move(layers));
  scalars.out_width = kFilters;
  branches_.push_back(std::move(scalars));

  for (const auto& b : branches_) feature_width_ += b.out_width;

  auto head = [&](std::size_t outputs) {
    std::vector<nn::Layer> h;
    h.emplace_back(nn::Dense(feature_width_, kHeadWidth, rng));
    h.emplace_back(Activation(ActivationKind::kRelu));
    h.emplace_back(nn::Dense(kHeadWidth, outputs, rng));
    return nn::Sequential(std::move(h));
  };
  policy_head_ = head(n);
  value_head_ = head(1);
}

Tensor AgentNet::slice(const Tensor& inputs, const Branch& b) const {
  const std::size_t batch = inputs.dim(0);
  Tensor out(b.sequence ? std::vector<std::size_t>{batch, 1, b.length} : std::vector<std::size_t>{batch, b.length});
  for (std::size_t r = 0; r < batch; ++r)
    std::copy_n(inputs.ptr() + r * input_dim_ + b.offset, b.length, out.ptr() + r * b.length);
  return out;
}

Tensor AgentNet::merge(const std::vector<Tensor>& parts, std::size_t batch) const {
  Tensor features({batch, feature_width_});
  std::size_t col = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t w = branches_[i].out_width;
    for (std::size_t r = 0; r < batch; ++r)
      std::copy_n(parts[i].ptr() + r * w, w, features.ptr() + r * feature_width_ + col);
    col += w;
  }
  return features;
}

NetOutput AgentNet::infer(const Tensor& inputs) const {
  if (inputs.rank() != 2 || inputs.dim(1) != input_dim_)
    throw ValidationError("agent input shape " + nn::shape_string(inputs.shape()) + ", expected [B," +
                          std::to_string(input_dim_) + "]");
  std::vector<Tensor> parts;
  for (const auto& b : branches_) parts.push_back(b.net.infer(slice(inputs, b)));
  const Tensor features = merge(parts, inputs.dim(0));
  return {policy_head_.infer(features), value_head_.infer(features)};
}

NetOutput AgentNet::forward(const Tensor& inputs) {
  if (inputs.rank() != 2 || inputs.dim(1) != input_dim_)
    throw ValidationError("agent input shape " + nn::shape_string(inputs.shape()) + ", expected [B," +
                          std::to_string(input_dim_) + "]");
  std::vector<Tensor> parts;
  for (auto& b : branches_) parts.push_back(b.net.forward(slice(inputs, b), Mode::kTrain));
  const Tensor features = merge(parts, inputs.dim(0));
  return {policy_head_.forward(features, Mode::kTrain), value_head_.forward(features, Mode::kTrain)};
}

void AgentNet::backward_trunk(const Tensor& d_features) {
  const std::size_t batch = d_features.dim(0);
  std::size_t col = 0;
  for (auto& b : branches_) {
    const std::size_t w = b.out_width;
    Tensor part({batch, w});
    for (std::size_t r = 0; r < batch; ++r)
      std::copy_n(d_features.ptr() + r * feature_width_ + col, w, part.ptr() + r * w);
    if (b.sequence) part = part.reshaped({batch, kFilters, w / kFilters});
    b.net.backward(part);
    col += w;
  }
}

void AgentNet::backward_policy(const Tensor& d_logits) { backward_trunk(policy_head_.backward(d_logits)); }
void AgentNet::backward_value(const Tensor& d_values) { backward_trunk(value_head_.backward(d_values)); }

std::vector<nn::Param*> AgentNet::trunk_params() {
  std::vector<nn::Param*> out;
  for (auto& b : branches_)
    for (nn::Param* p : b.net.params()) out.push_back(p);
  return out;
}

std::vector<nn::Param*> AgentNet::policy_params() {
  auto out = trunk_params();
  for (nn::Param* p : policy_head_.params()) out.push_back(p);
  return out;
}

std::vector<nn::Param*> AgentNet::value_params() {
  auto out = trunk_params();
  for (nn::Param* p : value_head_.params()) out.push_back(p);
  return out;
}

std::vector<Tensor*> AgentNet::state() {
  std::vector<Tensor*> out;
  for (auto& b : branches_)
    for (Tensor* t : b.net.state()) out.push_back(t);
  for (Tensor* t : policy_head_.state()) out.push_back(t);
  for (Tensor* t : value_head_.state()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> AgentNet::state() const {
  std::vector<const Tensor*> out;
  for (const auto& b : branches_)
    for (const Tensor* t : b.net.state()) out.push_back(t);
  for (const Tensor* t : policy_head_.state()) out.push_back(t);
  for (const Tensor* t : value_head_.state()) out.push_back(t);
  return out;
}

void AgentNet::zero_grad() {
  for (auto& b : branches_) b.net.zero_grad();
  policy_head_.zero_grad();
  value_head_.zero_grad();
}

// ---- action selection and schedules ----

int greedy_action(std::span<const float> logits) {
  if (logits.empty()) throw ValidationError("no logits to choose from");
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

int sample_action(std::span<const float> logits, Rng& rng) {
  if (logits.empty()) throw ValidationError("no logits to choose from");
  const auto logp = log_softmax(logits);
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < logp.size(); ++j) {
    acc += std::exp(logp[j]);
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(logp.size() - 1);
}

double dynamic_lr(double w, double lr0) {
  if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("win rate must lie in [0, 1]");
  const double w_ln_w = w > 0.0 ? w * std::log(w) : 0.0;
  return w < 0.5 ? lr0 * (w_ln_w + 2.0) : -lr0 * w_ln_w;
}

std::vector<double> td_targets(std::span<const double> rewards, std::span<const double> values, double gamma,
                               int n_step) {
  if (rewards.size() != values.size()) throw ValidationError("rewards and values differ in length");
  if (n_step < 1) throw ValidationError("n_step must be >= 1");
  const std::size_t steps = rewards.size();
  const auto n = static_cast<std::size_t>(n_step);
  std::vector<double> q(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t m = std::min(n, steps - t);
    double acc = 0.0, discount = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      acc += discount * rewards[t + i];
      discount *= gamma;
    }
    if (t + m < steps) acc += discount * values[t + m];
    q[t] = acc;
  }
  return q;
}

std::vector<double> advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                               int n_step) {
  auto q = td_targets(rewards, values, gamma, n_step);
  for (std::size_t t = 0; t < q.size(); ++t) q[t] -= values[t];
  return q;
}

std::vector<double> step_rewards(std::size_t steps, double outcome_reward, RewardMode mode) {
  if (mode == RewardMode::kEveryStep) return std::vector<double>(steps, outcome_reward);
  std::vector<double> r(steps, 0.0);
  if (steps > 0) r.back() = outcome_reward;
  return r;
}

double entropy(std::span<const float> logits) {
  const auto logp = log_softmax(logits);
  double h = 0.0;
  for (double lp : logp) h -= std::exp(lp) * lp;
  return h;
}

// ---- losses ----

namespace {

struct PolicyTerms {
  double loss = 0.0;
  double entropy = 0.0;
  Tensor d_logits;
};

PolicyTerms policy_terms(const Tensor& logits, std::span<const int> actions, std::span<const double> adv,
                         double beta) {
  const std::size_t batch = logits.dim(0), levels = logits.dim(1);
  const double inv_b = 1.0 / static_cast<double>(batch);
  PolicyTerms out;
  out.d_logits = Tensor(logits.shape());
  for (std::size_t r = 0; r < batch; ++r) {
    const auto a = static_cast<std::size_t>(actions[r]);
    if (actions[r] < 0 || a >= levels) throw ValidationError("action index out of range");
    const auto logp = log_softmax(row(logits, r));
    double h = 0.0;
    for (double lp : logp) h -= std::exp(lp) * lp;
    out.loss -= (logp[a] * adv[r] + beta * h) * inv_b;
    out.entropy += h * inv_b;
    for (std::size_t j = 0; j < levels; ++j) {
      const double p = std::exp(logp[j]);
      const double d_logpa = (j == a ? 1.0 : 0.0) - p;
      const double d_h = -p * (logp[j] + h);
      out.d_logits.at(r, j) = static_cast<float>(-(adv[r] * d_logpa + beta * d_h) * inv_b);
    }
  }
  return out;
}

}  // namespace

double policy_loss(const AgentNet& net, const Tensor& inputs, std::span<const int> actions,
                   std::span<const double> adv, double beta) {
  check_batch(inputs, actions.size(), "policy_loss");
  check_batch(inputs, adv.size(), "policy_loss");
  return policy_terms(net.infer(inputs).logits, actions, adv, beta).loss;
}

double value_loss(const AgentNet& net, const Tensor& inputs, std::span<const double> targets) {
  check_batch(inputs, targets.size(), "value_loss");
  const Tensor v = net.infer(inputs).values;
  double loss = 0.0;
  for (std::size_t r = 0; r < targets.size(); ++r) loss += (targets[r] - v[r]) * (targets[r] - v[r]);
  return loss / static_cast<double>(targets.size());
}

double policy_gradient(AgentNet& net, const Tensor& inputs, std::span<const int> actions,
                       std::span<const double> adv, double beta) {
  check_batch(inputs, actions.size(), "policy_gradient");
  check_batch(inputs, adv.size(), "policy_gradient");
  net.zero_grad();
  const NetOutput out = net.forward(inputs);
  PolicyTerms terms = policy_terms(out.logits, actions, adv, beta);
  net.backward_policy(terms.d_logits);
  return terms.loss;
}

double value_gradient(AgentNet& net, const Tensor& inputs, std::span<const double> targets) {
  check_batch(inputs, targets.size(), "value_gradient");
  net.zero_grad();
  const NetOutput out = net.forward(inputs);
  const std::size_t batch = targets.size();
  Tensor d_values({batch, 1});
  double loss = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    const double err = targets[r] - out.values[r];
    loss += err * err / static_cast<double>(batch);
    d_values[r] = static_cast<float>(-2.0 * err / static_cast<double>(batch));
  }
  net.backward_value(d_values);
  return loss;
}

Episode make_episode(const Trajectory& trajectory, double outcome_reward, const AgentConfig& cfg,
                     const NormalizationContext& ctx) {
  Episode e;
  for (const auto& step : trajectory.steps) {
    e.inputs.push_back(normalize(step.observation, cfg, ctx));
    e.actions.push_back(step.action);
  }
  e.rewards = step_rewards(trajectory.steps.size(), outcome_reward, cfg.reward_mode);
  return e;
}

// ---- Agent ----

Agent::Agent(AgentConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      net_([&] {
        Rng rng(mix_seed(seed, 1));
        return AgentNet(cfg, rng);
      }()),
      generator_([&] {
        Rng rng(mix_seed(seed, 2));
        return make_generator(cfg.input_dim(), rng);
      }()),
      discriminator_([&] {
        Rng rng(mix_seed(seed, 3));
        return make_discriminator(rng);
      }()),
      win_buffer_(cfg.win_buffer_capacity) {}

std::vector<float> Agent::logits(std::span<const float> input) const {
  const Tensor z = net_.infer(to_row(input)).logits;
  return {z.data().begin(), z.data().end()};
}

std::vector<double> Agent::probabilities(std::span<const float> input) const {
  auto logp = log_softmax(logits(input));
  for (double& v : logp) v = std::exp(v);
  return logp;
}

int Agent::act(std::span<const float> input, ActMode mode, Rng* rng) const {
  const auto z = logits(input);
  if (mode == ActMode::kGreedy) return greedy_action(z);
  if (rng == nullptr) throw std::invalid_argument("sample mode needs a generator");
  return sample_action(z, *rng);
}

HiddenProvider Agent::hidden_provider(const NormalizationContext& ctx) const {
  return [this, ctx](const Observation* previous) {
    if (previous == nullptr || !cfg_.use_gem) return std::vector<double>(kHiddenSize, 0.0);
    const auto h = gen_hidden(generator_, normalize(*previous, cfg_, ctx));
    return std::vector<double>(h.begin(), h.end());
  };
}

Policy Agent::greedy_policy(const NormalizationContext& ctx) const {
  return [this, ctx](const Observation& obs) { return act(normalize(obs, cfg_, ctx), ActMode::kGreedy, nullptr); };
}

Trajectory Agent::play(const Manifest& manifest, const Trace& trace, const SessionConfig& session, ActMode mode,
                       std::uint64_t seed) const {
  if (static_cast<int>(manifest.num_levels()) != cfg_.levels)
    throw ValidationError("manifest has " + std::to_string(manifest.num_levels()) + " levels, agent expects " +
                          std::to_string(cfg_.levels));
  const auto ctx = normalization_context(manifest, session);
  Rng rng(seed);
  Policy policy = [&](const Observation& obs) { return act(normalize(obs, cfg_, ctx), mode, &rng); };
  return run_session(policy, manifest, trace, session, hidden_provider(ctx));
}

void Agent::save(const std::filesystem::path& path) const {
  std::vector<const Tensor*> tensors = net_.state();
  for (const Tensor* t : generator_.net.state()) tensors.push_back(t);
  for (const Tensor* t : discriminator_.net.state()) tensors.push_back(t);
  nn::write_checkpoint(path, {{"kind", "agent"}, {"agent_config", to_json(cfg_)}}, tensors);
}

Agent Agent::load(const std::filesystem::path& path) {
  auto contents = nn::read_checkpoint(path);
  if (contents.header.value("kind", "") != "agent")
    throw std::runtime_error("checkpoint does not hold an agent: " + path.string());
  Agent agent(agent_config_from_json(contents.header.at("agent_config")), 0);
  std::vector<Tensor*> state = agent.net_.state();
  for (Tensor* t : agent.generator_.net.state()) state.push_back(t);
  for (Tensor* t : agent.discriminator_.net.state()) state.push_back(t);
  nn::assign_state(state, contents.tensors);
  return agent;
}

// ---- update ----

LossReport update(Agent& agent, const UpdateBatch& batch, AgentOptimizers& opt) {
  const AgentConfig& cfg = agent.config();
  std::size_t rows = 0;
  for (const auto& e : batch.episodes) {
    if (e.inputs.size() != e.actions.size() || e.inputs.size() != e.rewards.size())
      throw ValidationError("episode fields differ in length");
    rows += e.inputs.size();
  }
  if (rows == 0) throw ValidationError("update batch is empty");
  const double lr_policy = dynamic_lr(batch.win_rate, cfg.lr_policy);
  const double lr_value = dynamic_lr(batch.win_rate, cfg.lr_value);

  const std::size_t dim = cfg.input_dim();
  Tensor inputs({rows, dim});
  std::vector<int> actions;
  actions.reserve(rows);
  std::size_t r = 0;
  for (const auto& e : batch.episodes) {
    for (std::size_t t = 0; t < e.inputs.size(); ++t, ++r) {
      if (e.inputs[t].size() != dim) throw ValidationError("episode input width does not match agent");
      std::copy(e.inputs[t].begin(), e.inputs[t].end(), inputs.ptr() + r * dim);
    }
    actions.insert(actions.end(), e.actions.begin(), e.actions.end());
  }

  AgentNet& net = agent.net();
  const Tensor values = net.infer(inputs).values;
  std::vector<double> targets, adv;
  std::size_t offset = 0;
  for (const auto& e : batch.episodes) {
    const std::size_t len = e.inputs.size();
    std::vector<double> v(values.ptr() + offset, values.ptr() + offset + len);
    auto q = td_targets(e.rewards, v, cfg.gamma, cfg.n_step);
    for (std::size_t t = 0; t < len; ++t) {
      targets.push_back(q[t]);
      adv.push_back(q[t] - v[t]);
    }
    offset += len;
  }

  LossReport report;
  {
    const Tensor logits = net.infer(inputs).logits;
    for (std::size_t i = 0; i < rows; ++i) report.entropy += entropy(row(logits, i)) / static_cast<double>(rows);
  }
  report.policy_loss = policy_gradient(net, inputs, actions, adv, cfg.entropy_weight);
  auto policy_params = net.policy_params();
  std::vector<Tensor> policy_grads;
  for (const nn::Param* p : policy_params) policy_grads.push_back(p->grad);

  report.value_loss = value_gradient(net, inputs, targets);
  auto value_params = net.value_params();
  std::vector<Tensor> value_grads;
  for (const nn::Param* p : value_params) value_grads.push_back(p->grad);

  bool finite = std::isfinite(report.policy_loss) && std::isfinite(report.value_loss);
  for (const auto& g : policy_grads) finite = finite && g.all_finite();
  for (const auto& g : value_grads) finite = finite && g.all_finite();
  if (!finite) {
    net.zero_grad();
    return report;
  }

  for (std::size_t i = 0; i < policy_params.size(); ++i) policy_params[i]->grad = policy_grads[i];
  opt.policy.step(policy_params, lr_policy);
  for (std::size_t i = 0; i < value_params.size(); ++i) value_params[i]->grad = value_grads[i];
  opt.value.step(value_params, lr_value);
  net.zero_grad();
  report.applied = true;
  return report;
}

}  // namespace tiyuntsong
