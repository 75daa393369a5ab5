#pragma once

// Network traces, video manifests and dataset partitioning.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace tiyuntsong {

struct TraceSample {
  double duration_s = 0.0;
  double bandwidth_kbps = 0.0;

  bool operator==(const TraceSample&) const = default;
};

/// Piecewise-constant bandwidth timeline. Immutable after construction.
class Trace {
 public:
  /// Throws ValidationError if samples is empty or any duration/bandwidth
  /// is not strictly positive (message names the sample index).
  Trace(std::string id, std::vector<TraceSample> samples);

  const std::string& id() const { return id_; }
  std::span<const TraceSample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double total_duration_s() const { return ends_.back(); }

  /// Index of the sample covering `offset_s` in [0, total_duration_s()).
  std::size_t segment_index(double offset_s) const;
  /// Start time of sample i within one loop of the trace.
  double segment_start(std::size_t i) const { return i == 0 ? 0.0 : ends_[i - 1]; }
  double segment_end(std::size_t i) const { return ends_[i]; }

  bool operator==(const Trace& other) const {
    return id_ == other.id_ && samples_ == other.samples_;
  }

 private:
  std::string id_;
  std::vector<TraceSample> samples_;
  std::vector<double> ends_;  // cumulative end time of each sample
};

enum class TraceFormat { kCanonicalJson, kTwoColumnText };

TraceFormat parse_trace_format(const std::string& name);

/// Two-column text: "time_s throughput_mbps" per non-blank line, strictly
/// increasing time. The final row has no successor timestamp and receives
/// the mean of the preceding durations (1 s when it is the only row).
Trace parse_two_column(std::istream& in, std::string id);

Trace trace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Trace& trace);

/// The trace id defaults to the file stem for two-column text.
Trace load_trace(const std::filesystem::path& path, TraceFormat format);
void save_trace(const Trace& trace, const std::filesystem::path& path);

/// Canonical-JSON traces in `dir` (every *.json file), sorted by file name.
std::vector<Trace> load_trace_dir(const std::filesystem::path& dir);

/// Bandwidth in effect at time t >= 0; t wraps modulo the total duration.
double bandwidth_at(const Trace& trace, double t);

struct TraceSynthConfig {
  int num_states = 8;
  double min_kbps = 200.0;
  double max_kbps = 6000.0;
  double mean_dwell_s = 30.0;
  double duration_s = 240.0;

  void validate() const;
};

nlohmann::json to_json(const TraceSynthConfig& cfg);
TraceSynthConfig trace_synth_config_from_json(const nlohmann::json& j);

/// Markov-chain trace. `num_states` bandwidth levels are drawn uniformly in
/// [min_kbps, max_kbps]; the chain starts in a uniformly chosen state, stays
/// for an exponential dwell with mean `mean_dwell_s`, then jumps to a
/// uniformly chosen different state. The last dwell is cut at `duration_s`
/// and consecutive samples at the same level are merged.
Trace synth_trace(const TraceSynthConfig& cfg, std::uint64_t seed, std::string id = "synth");

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

/// Seeded Fisher-Yates shuffle followed by partitioning. Counts are
/// floor(train_ratio * N) and floor(val_ratio * N); the remainder goes to
/// test, unless the two ratios sum to 1 (no test share requested), in which
/// case it goes to train.
DatasetSplit split_dataset(std::vector<std::string> ids, double train_ratio, double val_ratio,
                           std::uint64_t seed);

/// Bitrate ladder plus per-chunk, per-level sizes of one video.
class Manifest {
 public:
  Manifest(std::string id, double chunk_duration_s, std::vector<double> ladder_kbps,
           std::vector<std::vector<double>> chunk_sizes_bits);

  const std::string& id() const { return id_; }
  double chunk_duration_s() const { return chunk_duration_s_; }
  std::span<const double> ladder_kbps() const { return ladder_kbps_; }
  std::size_t num_levels() const { return ladder_kbps_.size(); }
  std::size_t num_chunks() const { return chunk_sizes_bits_.size(); }
  std::span<const double> chunk_sizes(std::size_t chunk) const { return chunk_sizes_bits_.at(chunk); }
  double chunk_size(std::size_t chunk, std::size_t level) const {
    return chunk_sizes_bits_.at(chunk).at(level);
  }
  double total_duration_s() const { return chunk_duration_s_ * static_cast<double>(num_chunks()); }

  bool operator==(const Manifest&) const = default;

 private:
  std::string id_;
  double chunk_duration_s_;
  std::vector<double> ladder_kbps_;
  std::vector<std::vector<double>> chunk_sizes_bits_;
};

Manifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

struct ManifestSynthConfig {
  std::vector<double> ladder_kbps{300, 750, 1200, 1850, 2850, 4300};
  int num_chunks = 48;
  double chunk_duration_s = 4.0;
  double vbr_jitter = 0.0;
  std::string id = "synth-video";
};

nlohmann::json to_json(const ManifestSynthConfig& cfg);
ManifestSynthConfig manifest_synth_config_from_json(const nlohmann::json& j);

/// size = bitrate_kbps * chunk_duration_s * 1000 * U[1 - jitter, 1 + jitter].
Manifest synth_manifest(const ManifestSynthConfig& cfg, std::uint64_t seed);

}  // namespace tiyuntsong
