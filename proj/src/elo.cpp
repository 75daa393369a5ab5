#include "tiyuntsong/elo.hpp"

#include <cmath>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

double expected_score(double ra, double rb) { return 1.0 / (1.0 + std::pow(10.0, (rb - ra) / 400.0)); }

std::pair<double, double> elo_update(double ra, double rb, double score_a, double k) {
  if (!(score_a == 0.0 || score_a == 0.5 || score_a == 1.0))
    throw ValidationError("elo_update: score must be 0, 0.5 or 1");
  const double delta = k * (score_a - expected_score(ra, rb));
  return {ra + delta, rb - delta};
}

Contestant baseline_contestant(BaselineKind kind) {
  return {std::string(baseline_name(kind)),
          [kind](const Manifest& m, const Trace& t, const SessionConfig& cfg) {
            return run_session(make_baseline_policy(kind, m, cfg), m, t, cfg);
          }};
}

double rating_of(const RatingTable& table, const std::string& name) {
  for (const auto& [n, r] : table)
    if (n == name) return r;
  throw ValidationError("unknown rated contestant '" + name + "'");
}

RatingTable anchor_baselines(std::span<const Contestant> contestants, std::span<const Trace> traces,
                             const Manifest& manifest, const SessionConfig& cfg, double k) {
  if (contestants.size() < 2) throw ValidationError("anchor_baselines: need at least two contestants");
  if (traces.empty()) throw ValidationError("anchor_baselines: empty trace set");

  // Each contestant's session on each trace is deterministic, so play once.
  std::vector<std::vector<SessionMetrics>> metrics(contestants.size());
  for (std::size_t i = 0; i < contestants.size(); ++i)
    for (const auto& trace : traces) metrics[i].push_back(contestants[i].play(manifest, trace, cfg).metrics);

  RatingTable table;
  for (const auto& c : contestants) table.emplace_back(c.name, kInitialRating);
  for (std::size_t i = 0; i < contestants.size(); ++i) {
    for (std::size_t j = i + 1; j < contestants.size(); ++j) {
      for (std::size_t t = 0; t < traces.size(); ++t) {
        const Outcome o = judge(metrics[i][t], metrics[j][t]);
        auto [ri, rj] = elo_update(table[i].second, table[j].second, match_score(o, 0), k);
        table[i].second = ri;
        table[j].second = rj;
      }
    }
  }
  return table;
}

double rate_agent(double agent_rating, const RatingTable& frozen, std::span<const BaselineMatch> matches,
                  double k) {
  for (const auto& m : matches) {
    const double opponent = rating_of(frozen, m.baseline);
    agent_rating = elo_update(agent_rating, opponent, match_score(m.outcome, 0), k).first;
  }
  return agent_rating;
}

}  // namespace tiyuntsong
