#pragma once

// Classical ABR rules used as rating anchors and opponents.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tiyuntsong/simulator.hpp"

namespace tiyuntsong {

enum class BaselineKind { kConstrained, kThroughput, kBola, kDynamicDash };

/// CLI/config names: "constrained", "throughput", "bola", "dynamic".
std::string_view baseline_name(BaselineKind kind);
/// Throws ValidationError listing the valid names.
BaselineKind parse_baseline(std::string_view name);
std::vector<BaselineKind> all_baselines();

/// Always the lower middle level, floor((n - 1) / 2).
int constrained(const Observation& obs, std::span<const double> ladder_kbps);

/// Harmonic mean of the (up to) `window` most recent non-zero throughput
/// samples; 0 when there are none.
double harmonic_mean_throughput(const Observation& obs, std::size_t window = 5);

/// Highest level whose bitrate does not exceed the harmonic-mean prediction.
int throughput_rule(const Observation& obs, std::span<const double> ladder_kbps);

/// BOLA-BASIC control parameters, with the buffer measured in chunks.
///
/// score_m = (v * (u_m + gp) - Q) / size_m with u_m = ln(size_m / size_0).
/// gp is fixed at 5 and v = (Q_max - 1) / (u_top + gp), Q_max being the
/// capacity in chunks and u_top the ladder utility ln(top / bottom). At
/// Q = Q_max - 1 (the fullest buffer a decision can see) the top level scores
/// exactly zero while every other level is negative, so the top level wins;
/// with gp >= 1 the score favours low levels on an empty buffer.
struct BolaParams {
  double v = 1.0;
  double gp = 5.0;
  double chunk_duration_s = 1.0;
};

BolaParams bola_params(double buffer_capacity_s, double chunk_duration_s,
                       std::span<const double> ladder_kbps, double gp = 5.0);
BolaParams bola_params(const Manifest& manifest, const SessionConfig& cfg);

/// argmax of the BOLA score over next-chunk sizes; ties go to the lower level.
int bola(const Observation& obs, const BolaParams& params);

/// Throughput rule below `switch_buffer_s` of buffer, BOLA at or above it.
int dynamic_dash(const Observation& obs, std::span<const double> ladder_kbps, const BolaParams& params,
                 double switch_buffer_s = 10.0);

/// A policy closure bound to one manifest and session configuration.
Policy make_baseline_policy(BaselineKind kind, const Manifest& manifest, const SessionConfig& cfg);

}  // namespace tiyuntsong
