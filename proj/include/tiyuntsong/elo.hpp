#pragma once

// Logistic Elo ratings (400-point scale) and round-robin anchoring.

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tiyuntsong/baselines.hpp"
#include "tiyuntsong/rule.hpp"

namespace tiyuntsong {

inline constexpr double kInitialRating = 1000.0;
inline constexpr double kDefaultEloK = 10.0;

struct Rating {
  double value = kInitialRating;
  double k_factor = kDefaultEloK;
};

/// 1 / (1 + 10^((rb - ra) / 400)).
double expected_score(double ra, double rb);

/// Returns (ra', rb'). score_a is 1, 0.5 or 0. The change applied to b is
/// the exact negation of the change applied to a.
std::pair<double, double> elo_update(double ra, double rb, double score_a, double k = kDefaultEloK);

/// Anything that can stream a video over a trace.
struct Contestant {
  std::string name;
  std::function<Trajectory(const Manifest&, const Trace&, const SessionConfig&)> play;
};

Contestant baseline_contestant(BaselineKind kind);

using RatingTable = std::vector<std::pair<std::string, double>>;

double rating_of(const RatingTable& table, const std::string& name);

/// Round robin: for every unordered pair (i < j, in input order) and then
/// for every trace, one match i-vs-j judged by `judge`; ratings are updated
/// after each match. Every contestant starts at kInitialRating.
RatingTable anchor_baselines(std::span<const Contestant> contestants, std::span<const Trace> traces,
                             const Manifest& manifest, const SessionConfig& cfg, double k = kDefaultEloK);

struct BaselineMatch {
  std::string baseline;
  Outcome outcome;  // the rated agent is agent0
};

/// Sequential updates of `agent_rating` against frozen baseline ratings.
/// Throws ValidationError for a baseline missing from `frozen`.
double rate_agent(double agent_rating, const RatingTable& frozen, std::span<const BaselineMatch> matches,
                  double k = kDefaultEloK);

}  // namespace tiyuntsong
