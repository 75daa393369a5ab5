#pragma once

// Two-agent self-play training. Each epoch samples M (trace, manifest)
// matches, rolls both agents out on identical inputs, judges every match,
// and then updates each agent from its own trajectories: winning hidden
// features into the agent's buffer, one GEM step, then the actor-critic
// step at a learning rate scheduled by the agent's epoch win rate.
//
// Rollouts read the agents only; they may be spread over worker threads.
// All parameter writes happen afterwards on the calling thread, in a fixed
// order, so a run is reproducible from its seed for any worker count.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tiyuntsong/agent.hpp"
#include "tiyuntsong/baselines.hpp"
#include "tiyuntsong/elo.hpp"
#include "tiyuntsong/rule.hpp"
#include "tiyuntsong/simulator.hpp"
#include "tiyuntsong/workload.hpp"

namespace tiyuntsong {

enum class UpdateGranularity {
  kEpoch,  // one actor-critic step per agent on all of the epoch's trajectories
  kMatch,  // one step per trajectory, in match order
};

struct TrainConfig {
  int epochs = 50;
  int matches_per_epoch = 16;
  int workers = 1;
  std::uint64_t seed = 0;
  int eval_every = 10;
  int checkpoint_every = 0;  // 0: final checkpoint only
  double elo_k = kDefaultEloK;
  UpdateGranularity granularity = UpdateGranularity::kEpoch;
  AgentConfig agent;
  SessionConfig session;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainData {
  std::vector<Trace> train;
  std::vector<Trace> validation;
  std::vector<Manifest> manifests;  // evaluation uses the first

  void validate(const TrainConfig& cfg) const;
};

struct MatchResult {
  Trajectory trajectory0;
  Trajectory trajectory1;
  Outcome outcome = Outcome::kDraw;
};

/// Both agents stream the same trace and manifest; the outcome judges
/// agent 0 against agent 1.
MatchResult run_match(const Agent& a0, const Agent& a1, const Trace& trace, const Manifest& manifest,
                      const SessionConfig& session, ActMode mode, std::uint64_t seed0 = 0, std::uint64_t seed1 = 0);

struct MatchSpec {
  std::size_t trace = 0;
  std::size_t manifest = 0;
  std::uint64_t seed0 = 0;
  std::uint64_t seed1 = 0;
};

/// The epoch's matches; match m depends only on (seed, epoch, m).
std::vector<MatchSpec> sample_matches(std::uint64_t seed, int epoch, int matches, std::size_t num_traces,
                                      std::size_t num_manifests);

/// Sample-mode rollouts of every match, spread over `workers` threads.
/// Result i belongs to spec i regardless of scheduling.
std::vector<MatchResult> collect_rollouts(const Agent& a0, const Agent& a1, std::span<const MatchSpec> specs,
                                          const TrainData& data, const SessionConfig& session, int workers);

struct AgentEpochStats {
  LossReport loss;
  GemReport gem;
  double mean_bitrate_kbps = 0.0;
  double mean_rebuffer_s = 0.0;
  double mean_change_kbps = 0.0;
};

struct EpochReport {
  int epoch = 0;
  double w0 = 0.5;
  double w1 = 0.5;
  double elo_a0 = kInitialRating;
  std::array<AgentEpochStats, 2> agents;
};

/// CSV header and row of the epoch log.
std::string epoch_log_header();
std::string epoch_log_row(const EpochReport& report);
/// Row written before training: epoch 0 with only the Elo column filled.
std::string epoch_log_anchor_row(double elo_a0);

struct EvalRecord {
  std::string trace;
  std::string opponent;
  Outcome outcome = Outcome::kDraw;  // subject is agent 0
  SessionMetrics subject;
  SessionMetrics opponent_metrics;
};

nlohmann::json to_json(const EvalRecord& r);

struct OpponentSummary {
  std::string opponent;
  double win_rate = 0.0;  // subject's score share, draws counting 0.5
  int wins = 0;
  int losses = 0;
  int draws = 0;
};

struct Evaluation {
  std::vector<EvalRecord> records;  // trace-major, opponent-minor
  std::vector<OpponentSummary> summary;
  double elo = kInitialRating;

  const OpponentSummary& against(const std::string& opponent) const;
};

/// Greedy play of `subject` against every opponent on every trace.
/// Throws ValidationError for an empty trace or opponent set.
Evaluation evaluate(const Contestant& subject, std::span<const Contestant> opponents, std::span<const Trace> traces,
                    const Manifest& manifest, const SessionConfig& session);

/// Greedy GEM-enabled play of an agent.
Contestant agent_contestant(const Agent& agent, std::string name = "tiyuntsong");

std::vector<BaselineMatch> baseline_matches(const Evaluation& eval);

class Trainer {
 public:
  Trainer(TrainConfig cfg, TrainData data);

  const TrainConfig& config() const { return cfg_; }
  const TrainData& data() const { return data_; }
  const Agent& agent(int i) const { return agents_.at(i); }
  Agent& agent(int i) { return agents_.at(i); }
  const RatingTable& baseline_ratings() const { return anchors_; }
  double elo() const { return elo_; }

  /// Rollouts, judging and updates for one epoch (1-based index). The
  /// report's Elo is the current value; call evaluate_a0 to refresh it.
  EpochReport run_epoch(int epoch);
  /// Rollouts only, for identical inputs to what run_epoch would use.
  std::vector<MatchResult> rollouts(int epoch) const;

  /// A0 against every baseline on the validation traces; folds the results
  /// into A0's Elo against the frozen baseline ratings.
  Evaluation evaluate_a0();

 private:
  void update_agent(int index, std::span<const MatchResult> results, double win_rate, int epoch,
                    AgentEpochStats& stats);

  TrainConfig cfg_;
  TrainData data_;
  std::array<Agent, 2> agents_;
  std::array<AgentOptimizers, 2> optimizers_;
  RatingTable anchors_;
  std::vector<Contestant> baselines_;
  double elo_ = kInitialRating;
};

struct TrainOutputs {
  std::vector<EpochReport> epochs;
  Evaluation final_evaluation;
};

using EpochCallback = std::function<void(const EpochReport&)>;

/// Full run. When `out_dir` is set, writes epochs.csv (flushed per row),
/// a0.ckpt / a1.ckpt (every checkpoint_every epochs and at the end),
/// eval.jsonl and ratings.json.
TrainOutputs train(const TrainConfig& cfg, const TrainData& data,
                   const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                   const EpochCallback& on_epoch = {});

void write_eval_jsonl(const Evaluation& eval, const std::filesystem::path& path);

}  // namespace tiyuntsong
