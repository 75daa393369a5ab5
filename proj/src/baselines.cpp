#include "tiyuntsong/baselines.hpp"

#include <cmath>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kConstrained: return "constrained";
    case BaselineKind::kThroughput: return "throughput";
    case BaselineKind::kBola: return "bola";
    case BaselineKind::kDynamicDash: return "dynamic";
  }
  return "?";
}

BaselineKind parse_baseline(std::string_view name) {
  for (auto kind : all_baselines())
    if (baseline_name(kind) == name) return kind;
  throw ValidationError("unknown baseline '" + std::string(name) +
                        "' (valid: constrained, throughput, bola, dynamic)");
}

std::vector<BaselineKind> all_baselines() {
  return {BaselineKind::kConstrained, BaselineKind::kThroughput, BaselineKind::kBola,
          BaselineKind::kDynamicDash};
}

int constrained(const Observation&, std::span<const double> ladder_kbps) {
  if (ladder_kbps.empty()) return 0;
  return static_cast<int>((ladder_kbps.size() - 1) / 2);
}

double harmonic_mean_throughput(const Observation& obs, std::size_t window) {
  double inv_sum = 0.0;
  std::size_t used = 0;
  for (auto it = obs.throughput_kbps.rbegin(); it != obs.throughput_kbps.rend() && used < window; ++it) {
    if (*it > 0.0) {
      inv_sum += 1.0 / *it;
      ++used;
    }
  }
  return used ? static_cast<double>(used) / inv_sum : 0.0;
}

int throughput_rule(const Observation& obs, std::span<const double> ladder_kbps) {
  const double prediction = harmonic_mean_throughput(obs);
  int level = 0;
  for (std::size_t i = 0; i < ladder_kbps.size(); ++i)
    if (ladder_kbps[i] <= prediction) level = static_cast<int>(i);
  return level;
}

BolaParams bola_params(double buffer_capacity_s, double chunk_duration_s,
                       std::span<const double> ladder_kbps, double gp) {
  if (!(chunk_duration_s > 0.0) || !(buffer_capacity_s > chunk_duration_s))
    throw ValidationError("bola: capacity must exceed the chunk duration");
  if (!(gp > 0.0)) throw ValidationError("bola: gp must be positive");
  BolaParams p;
  p.gp = gp;
  p.chunk_duration_s = chunk_duration_s;
  const double u_top = ladder_kbps.size() > 1 ? std::log(ladder_kbps.back() / ladder_kbps.front()) : 0.0;
  const double q_max = buffer_capacity_s / chunk_duration_s;
  p.v = (q_max - 1.0) / (u_top + gp);
  return p;
}

BolaParams bola_params(const Manifest& manifest, const SessionConfig& cfg) {
  return bola_params(cfg.buffer_capacity_s, manifest.chunk_duration_s(), manifest.ladder_kbps());
}

int bola(const Observation& obs, const BolaParams& params) {
  const auto& sizes = obs.next_sizes_bits;
  if (sizes.size() <= 1 || !(sizes.front() > 0.0)) return 0;
  const double q = obs.buffer_s / params.chunk_duration_s;
  int best = 0;
  double best_score = 0.0;
  for (std::size_t m = 0; m < sizes.size(); ++m) {
    const double u = std::log(sizes[m] / sizes.front());
    const double score = (params.v * (u + params.gp) - q) / sizes[m];
    if (m == 0 || score > best_score) {
      best = static_cast<int>(m);
      best_score = score;
    }
  }
  return best;
}

int dynamic_dash(const Observation& obs, std::span<const double> ladder_kbps, const BolaParams& params,
                 double switch_buffer_s) {
  if (obs.buffer_s < switch_buffer_s) return throughput_rule(obs, ladder_kbps);
  return bola(obs, params);
}

Policy make_baseline_policy(BaselineKind kind, const Manifest& manifest, const SessionConfig& cfg) {
  std::vector<double> ladder(manifest.ladder_kbps().begin(), manifest.ladder_kbps().end());
  switch (kind) {
    case BaselineKind::kConstrained:
      return [ladder](const Observation& o) { return constrained(o, ladder); };
    case BaselineKind::kThroughput:
      return [ladder](const Observation& o) { return throughput_rule(o, ladder); };
    case BaselineKind::kBola: {
      auto p = bola_params(manifest, cfg);
      return [p](const Observation& o) { return bola(o, p); };
    }
    case BaselineKind::kDynamicDash: {
      auto p = bola_params(manifest, cfg);
      return [ladder, p](const Observation& o) { return dynamic_dash(o, ladder, p); };
    }
  }
  throw std::logic_error("unhandled baseline kind");
}

}  // namespace tiyuntsong
