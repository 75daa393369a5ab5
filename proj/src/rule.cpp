#include "tiyuntsong/rule.hpp"

#include <cmath>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

namespace {

void check(const SessionMetrics& m, const char* who) {
  auto ok = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!ok(m.total_bitrate_kbps) || !ok(m.total_rebuffer_s) || !ok(m.total_change_kbps))
    throw ValidationError(std::string("judge: ") + who + " metrics must be finite and non-negative");
  if (!(m.total_bitrate_kbps > 0.0)) throw ValidationError(std::string("judge: ") + who + " total bitrate must be positive");
}

Outcome by_change(double s0, double s1) {
  if (s0 > s1) return Outcome::kAgent1;
  if (s0 < s1) return Outcome::kAgent0;
  return Outcome::kDraw;
}

Outcome by_ratio(const SessionMetrics& m0, const SessionMetrics& m1) {
  const double q0 = m0.total_rebuffer_s / m0.total_bitrate_kbps;
  const double q1 = m1.total_rebuffer_s / m1.total_bitrate_kbps;
  if (q0 > q1) return Outcome::kAgent1;
  if (q0 < q1) return Outcome::kAgent0;
  return by_change(m0.total_change_kbps, m1.total_change_kbps);
}

}  // namespace

Outcome judge(const SessionMetrics& m0, const SessionMetrics& m1) {
  check(m0, "agent0");
  check(m1, "agent1");
  const double r0 = m0.total_rebuffer_s, r1 = m1.total_rebuffer_s;
  const double b0 = m0.total_bitrate_kbps, b1 = m1.total_bitrate_kbps;

  if (r0 > r1) return b0 > b1 ? by_ratio(m0, m1) : Outcome::kAgent1;
  if (r0 < r1) return b0 < b1 ? by_ratio(m0, m1) : Outcome::kAgent0;
  if (b0 > b1) return Outcome::kAgent0;
  if (b0 < b1) return Outcome::kAgent1;
  return by_change(m0.total_change_kbps, m1.total_change_kbps);
}

Outcome swapped(Outcome o) {
  switch (o) {
    case Outcome::kAgent0: return Outcome::kAgent1;
    case Outcome::kAgent1: return Outcome::kAgent0;
    case Outcome::kDraw: return Outcome::kDraw;
  }
  return o;
}

double match_score(Outcome o, int agent) {
  if (o == Outcome::kDraw) return 0.5;
  const bool won = (o == Outcome::kAgent0) == (agent == 0);
  return won ? 1.0 : 0.0;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kAgent0: return "agent0";
    case Outcome::kAgent1: return "agent1";
    case Outcome::kDraw: return "draw";
  }
  return "?";
}

WinRates win_rate(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw ValidationError("win_rate: no outcomes");
  double points = 0.0;
  for (auto o : outcomes) points += match_score(o, 0);
  WinRates w;
  w.w0 = points / static_cast<double>(outcomes.size());
  w.w1 = 1.0 - w.w0;
  return w;
}

}  // namespace tiyuntsong
