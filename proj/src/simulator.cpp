#include "tiyuntsong/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

void SessionConfig::validate(const Manifest& manifest) const {
  if (!std::isfinite(buffer_capacity_s) || !(buffer_capacity_s > manifest.chunk_duration_s()))
    throw ValidationError("buffer_capacity_s must exceed the chunk duration");
  if (!std::isfinite(per_chunk_latency_s) || per_chunk_latency_s < 0.0)
    throw ValidationError("per_chunk_latency_s must be non-negative");
  if (history_len < 1) throw ValidationError("history_len must be >= 1");
}

nlohmann::json to_json(const SessionConfig& cfg) {
  return {{"buffer_capacity_s", cfg.buffer_capacity_s},
          {"per_chunk_latency_s", cfg.per_chunk_latency_s},
          {"history_len", cfg.history_len}};
}

SessionConfig session_config_from_json(const nlohmann::json& j) {
  SessionConfig cfg;
  cfg.buffer_capacity_s = j.value("buffer_capacity_s", cfg.buffer_capacity_s);
  cfg.per_chunk_latency_s = j.value("per_chunk_latency_s", cfg.per_chunk_latency_s);
  cfg.history_len = j.value("history_len", cfg.history_len);
  return cfg;
}

nlohmann::json to_json(const SessionMetrics& m) {
  return {{"total_bitrate_kbps", m.total_bitrate_kbps},
          {"total_rebuffer_s", m.total_rebuffer_s},
          {"total_change_kbps", m.total_change_kbps},
          {"chunks", m.chunks},
          {"mean_bitrate_kbps", m.mean_bitrate_kbps()},
          {"mean_change_kbps", m.mean_change_kbps()}};
}

nlohmann::json to_json(const Trajectory& trajectory) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trajectory.steps) {
    steps.push_back({{"action", s.action},
                     {"download_time_s", s.download_time_s},
                     {"stall_s", s.stall_s},
                     {"idle_s", s.idle_s},
                     {"buffer_s", s.observation.buffer_s},
                     {"hidden", s.observation.hidden}});
  }
  return {{"steps", std::move(steps)},
          {"metrics", to_json(trajectory.metrics)},
          {"final_clock_s", trajectory.final_clock_s}};
}

double transfer_time(const Trace& trace, double start_s, double bits) {
  if (!(bits > 0.0)) return 0.0;
  const double period = trace.total_duration_s();
  double offset = std::fmod(start_s, period);
  if (offset < 0.0) offset = 0.0;
  std::size_t seg = trace.segment_index(offset);
  double elapsed = 0.0;
  double left = bits;
  bool wrapped = false;
  for (;;) {
    const double bps = trace.samples()[seg].bandwidth_kbps * 1000.0;
    const double span = trace.segment_end(seg) - offset;
    const double capacity = span * bps;
    if (capacity >= left) return elapsed + left / bps;
    left -= capacity;
    elapsed += span;
    if (++seg == trace.size()) {
      seg = 0;
      offset = 0.0;
      if (!wrapped) {
        // Skip whole loops of the trace in one go.
        wrapped = true;
        double loop_bits = 0.0;
        for (const auto& s : trace.samples()) loop_bits += s.duration_s * s.bandwidth_kbps * 1000.0;
        double loops = std::floor(left / loop_bits);
        if (loops * loop_bits >= left) loops -= 1.0;
        if (loops > 0.0) {
          elapsed += loops * period;
          left -= loops * loop_bits;
        }
      }
    } else {
      offset = trace.segment_start(seg);
    }
  }
}

Session::Session(const Manifest& manifest, const Trace& trace, SessionConfig cfg)
    : manifest_(&manifest), trace_(&trace), cfg_(cfg) {
  cfg_.validate(manifest);
  const auto k = static_cast<std::size_t>(cfg_.history_len);
  observation_.throughput_kbps.assign(k, 0.0);
  observation_.download_time_s.assign(k, 0.0);
  observation_.bitrate_kbps.assign(k, 0.0);
  observation_.hidden.assign(kHiddenSize, 0.0);
  refresh_lookahead();
}

void Session::set_hidden(std::vector<double> hidden) {
  if (hidden.size() != kHiddenSize) throw ValidationError("hidden feature must have length 16");
  observation_.hidden = std::move(hidden);
}

void Session::refresh_lookahead() {
  const std::size_t left = manifest_->num_chunks() - chunk_;
  observation_.remaining_play_s = static_cast<double>(left) * manifest_->chunk_duration_s();
  if (done()) {
    observation_.next_sizes_bits.assign(manifest_->num_levels(), 0.0);
  } else {
    auto sizes = manifest_->chunk_sizes(chunk_);
    observation_.next_sizes_bits.assign(sizes.begin(), sizes.end());
  }
}

namespace {
void push_history(std::vector<double>& history, double value) {
  std::rotate(history.begin(), history.begin() + 1, history.end());
  history.back() = value;
}
}  // namespace

StepResult Session::step(int action) {
  if (done()) throw std::logic_error("step() on a finished session");
  if (action < 0 || static_cast<std::size_t>(action) >= manifest_->num_levels())
    throw ValidationError("action " + std::to_string(action) + " outside the ladder");
  const auto level = static_cast<std::size_t>(action);
  const double size = manifest_->chunk_size(chunk_, level);
  const double chunk_s = manifest_->chunk_duration_s();

  StepResult r;
  r.download_time_s =
      cfg_.per_chunk_latency_s + transfer_time(*trace_, clock_s_ + cfg_.per_chunk_latency_s, size);

  double& buffer = observation_.buffer_s;
  if (playing_) {
    r.stall_s = std::max(0.0, r.download_time_s - buffer);
    buffer = std::max(0.0, buffer - r.download_time_s);
    metrics_.total_rebuffer_s += r.stall_s;
  }
  clock_s_ += r.download_time_s;
  buffer += chunk_s;
  playing_ = true;

  const double kbps = manifest_->ladder_kbps()[level];
  metrics_.total_bitrate_kbps += kbps;
  if (last_level_ >= 0) metrics_.total_change_kbps += std::abs(kbps - manifest_->ladder_kbps()[static_cast<std::size_t>(last_level_)]);
  ++metrics_.chunks;
  last_level_ = action;

  push_history(observation_.throughput_kbps, size / r.download_time_s / 1000.0);
  push_history(observation_.download_time_s, r.download_time_s);
  push_history(observation_.bitrate_kbps, kbps);

  ++chunk_;
  if (!done() && buffer + chunk_s > cfg_.buffer_capacity_s) {
    r.idle_s = buffer + chunk_s - cfg_.buffer_capacity_s;
    buffer = cfg_.buffer_capacity_s - chunk_s;
    clock_s_ += r.idle_s;
  }
  refresh_lookahead();
  r.done = done();
  return r;
}

HiddenProvider zero_hidden() {
  return [](const Observation*) { return std::vector<double>(kHiddenSize, 0.0); };
}

Trajectory run_session(const Policy& policy, const Manifest& manifest, const Trace& trace,
                       const SessionConfig& cfg, const HiddenProvider& hidden) {
  Session session(manifest, trace, cfg);
  Trajectory out;
  out.steps.reserve(manifest.num_chunks());
  while (!session.done()) {
    const Observation* previous = out.steps.empty() ? nullptr : &out.steps.back().observation;
    session.set_hidden(hidden(previous));
    TrajectoryStep step;
    step.observation = session.observation();
    step.action = policy(step.observation);
    StepResult r = session.step(step.action);
    step.download_time_s = r.download_time_s;
    step.stall_s = r.stall_s;
    step.idle_s = r.idle_s;
    out.steps.push_back(std::move(step));
  }
  out.metrics = session.metrics();
  out.final_clock_s = session.clock_s();
  return out;
}

}  // namespace tiyuntsong
