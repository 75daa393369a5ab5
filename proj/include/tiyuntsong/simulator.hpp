#pragma once

// Offline chunk-by-chunk ABR session engine.
//
// A session downloads every chunk of a Manifest in order over a looping
// Trace. The client starts with an empty buffer; playback starts once the
// first chunk has arrived, so the first download counts as startup delay
// rather than rebuffering. While a chunk downloads the buffer drains and any
// shortfall is a stall. When the next chunk would not fit into the buffer
// the client idles until it does.

#include <cstddef>
#include <functional>
#include <vector>

#include "json.hpp"
#include "tiyuntsong/workload.hpp"

namespace tiyuntsong {

inline constexpr std::size_t kHiddenSize = 16;

struct SessionConfig {
  double buffer_capacity_s = 25.0;
  double per_chunk_latency_s = 0.0;
  int history_len = 10;

  /// Checks the session against a manifest (capacity must exceed one chunk).
  void validate(const Manifest& manifest) const;
};

nlohmann::json to_json(const SessionConfig& cfg);
SessionConfig session_config_from_json(const nlohmann::json& j);

/// What a policy sees before choosing the level of the next chunk. Physical
/// units throughout; histories are oldest-first with the newest entry last
/// and zero-filled before the history is full.
struct Observation {
  std::vector<double> throughput_kbps;  // k
  std::vector<double> download_time_s;  // k
  std::vector<double> bitrate_kbps;     // k
  double remaining_play_s = 0.0;        // video not yet downloaded
  double buffer_s = 0.0;
  std::vector<double> next_sizes_bits;  // n
  std::vector<double> hidden;           // kHiddenSize

  bool operator==(const Observation&) const = default;
};

struct SessionMetrics {
  double total_bitrate_kbps = 0.0;
  double total_rebuffer_s = 0.0;
  double total_change_kbps = 0.0;
  std::size_t chunks = 0;

  double mean_bitrate_kbps() const { return chunks ? total_bitrate_kbps / static_cast<double>(chunks) : 0.0; }
  double mean_change_kbps() const {
    return chunks > 1 ? total_change_kbps / static_cast<double>(chunks - 1) : 0.0;
  }

  bool operator==(const SessionMetrics&) const = default;
};

nlohmann::json to_json(const SessionMetrics& m);

struct StepResult {
  double download_time_s = 0.0;
  double stall_s = 0.0;
  double idle_s = 0.0;
  bool done = false;
};

struct TrajectoryStep {
  Observation observation;  // the state the action was chosen in (carries h_t)
  int action = 0;
  double download_time_s = 0.0;
  double stall_s = 0.0;
  double idle_s = 0.0;

  bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  SessionMetrics metrics;
  double final_clock_s = 0.0;

  bool operator==(const Trajectory&) const = default;
};

nlohmann::json to_json(const Trajectory& trajectory);

/// Time needed to move `bits` starting at absolute time `start_s`, by exact
/// integration of the piecewise-constant (looping) bandwidth.
double transfer_time(const Trace& trace, double start_s, double bits);

/// Mutable single-owner session. Holds references: the manifest and trace
/// must outlive it.
class Session {
 public:
  Session(const Manifest& manifest, const Trace& trace, SessionConfig cfg);
  Session(Manifest&&, const Trace&, SessionConfig) = delete;
  Session(const Manifest&, Trace&&, SessionConfig) = delete;

  const Observation& observation() const { return observation_; }
  void set_hidden(std::vector<double> hidden);

  /// Downloads the next chunk at `action`. Throws std::logic_error when the
  /// session is finished and ValidationError for an out-of-range level.
  StepResult step(int action);

  bool done() const { return chunk_ == manifest_->num_chunks(); }
  std::size_t chunk_index() const { return chunk_; }
  double clock_s() const { return clock_s_; }
  const SessionMetrics& metrics() const { return metrics_; }
  const SessionConfig& config() const { return cfg_; }
  const Manifest& manifest() const { return *manifest_; }

 private:
  void refresh_lookahead();

  const Manifest* manifest_;
  const Trace* trace_;
  SessionConfig cfg_;
  std::size_t chunk_ = 0;
  double clock_s_ = 0.0;
  bool playing_ = false;
  int last_level_ = -1;
  SessionMetrics metrics_;
  Observation observation_;
};

using Policy = std::function<int(const Observation&)>;

/// Produces h for the next decision. `previous` is the observation of the
/// previous decision (including its h), or nullptr before the first one.
using HiddenProvider = std::function<std::vector<double>(const Observation* previous)>;

HiddenProvider zero_hidden();

Trajectory run_session(const Policy& policy, const Manifest& manifest, const Trace& trace,
                       const SessionConfig& cfg, const HiddenProvider& hidden = zero_hidden());

}  // namespace tiyuntsong
