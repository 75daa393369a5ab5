#pragma once

// Pairwise match judge.
//
// Priorities, highest first: rebuffering and bitrate together, then
// rebuffering per unit of bitrate, then total bitrate change.
//
//   stage A        b0 > b1    b0 = b1    b0 < b1
//   r0 > r1        stage B    agent1     agent1
//   r0 = r1        agent0     stage C    agent1
//   r0 < r1        agent0     agent0     stage B
//
//   stage B: smaller r/b wins; equal ratios go to stage C.
//   stage C: smaller s wins; equal is a draw.

#include <span>

#include "tiyuntsong/simulator.hpp"

namespace tiyuntsong {

enum class Outcome { kAgent0, kAgent1, kDraw };

/// Throws ValidationError on NaN/infinite or negative metrics, or b <= 0.
Outcome judge(const SessionMetrics& m0, const SessionMetrics& m1);

/// The same outcome seen with the two agents swapped.
Outcome swapped(Outcome o);

/// 1 for a win, 0 for a loss, 0.5 for a draw, from `agent`'s point of view.
double match_score(Outcome o, int agent);

const char* outcome_name(Outcome o);

struct WinRates {
  double w0 = 0.5;
  double w1 = 0.5;
};

/// w0 = (wins0 + draws / 2) / total; w1 = 1 - w0. Throws on an empty input.
WinRates win_rate(std::span<const Outcome> outcomes);

}  // namespace tiyuntsong
