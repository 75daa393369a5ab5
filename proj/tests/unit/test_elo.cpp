#include <cmath>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "tiyuntsong/elo.hpp"
#include "tiyuntsong/error.hpp"

using namespace tiyuntsong;

TEST_SUITE("elo") {
  TEST_CASE("expected score") {
    CHECK(expected_score(1000, 1000) == 0.5);
    CHECK(expected_score(1200, 1000) == doctest::Approx(1.0 / (1.0 + std::pow(10.0, -0.5))).epsilon(1e-12));
    CHECK(expected_score(1200, 1000) == doctest::Approx(0.75975).epsilon(1e-5));
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
      const double a = rng.uniform(500, 1500), b = rng.uniform(500, 1500);
      CHECK(expected_score(a, b) + expected_score(b, a) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(expected_score(a + 1.0, b) > expected_score(a, b));
      CHECK(expected_score(a, b + 1.0) < expected_score(a, b));
    }
  }

  TEST_CASE("head-to-head updates") {
    auto [a, b] = elo_update(1000, 1000, 1.0, 10);
    CHECK(a == 1005.0);
    CHECK(b == 995.0);
    auto [c, d] = elo_update(1200, 1000, 0.0, 10);
    CHECK(c == doctest::Approx(1192.40).epsilon(0.01 / 1192.40));
    CHECK(d == doctest::Approx(1007.60).epsilon(0.01 / 1007.60));
    auto [e, f] = elo_update(1000, 1000, 0.5, 10);
    CHECK(e == 1000.0);
    CHECK(f == 1000.0);
    CHECK_THROWS_AS(elo_update(1000, 1000, 0.3), ValidationError);
  }

  TEST_CASE("updates conserve the rating sum") {
    Rng rng(12);
    const double scores[] = {0.0, 0.5, 1.0};
    for (int i = 0; i < 10000; ++i) {
      const double a = rng.uniform(0, 3000), b = rng.uniform(0, 3000);
      auto [a2, b2] = elo_update(a, b, scores[rng.index(3)], rng.uniform(1, 40));
      CHECK(std::abs((a2 + b2) - (a + b)) < 1e-9);
    }
  }

  TEST_CASE("identical contestants stay at the initial rating") {
    Rng rng(3);
    std::vector<Trace> traces;
    for (int i = 0; i < 5; ++i) traces.push_back(testing::random_trace(rng));
    const Manifest m = synth_manifest(ManifestSynthConfig{}, 0);
    const std::vector<Contestant> twins{baseline_contestant(BaselineKind::kBola),
                                        baseline_contestant(BaselineKind::kBola)};
    const RatingTable table = anchor_baselines(twins, traces, m, SessionConfig{});
    CHECK(table[0].second == kInitialRating);
    CHECK(table[1].second == kInitialRating);
  }

  TEST_CASE("a round robin conserves the total rating") {
    Rng rng(9);
    std::vector<Trace> traces;
    for (int i = 0; i < 10; ++i) traces.push_back(synth_trace(TraceSynthConfig{}, rng.next()));
    const Manifest m = synth_manifest(ManifestSynthConfig{}, 0);
    std::vector<Contestant> all;
    for (BaselineKind k : all_baselines()) all.push_back(baseline_contestant(k));
    const RatingTable table = anchor_baselines(all, traces, m, SessionConfig{});
    double sum = 0.0;
    for (const auto& [name, r] : table) sum += r;
    CHECK(sum == doctest::Approx(1000.0 * 4).epsilon(1e-12));
    CHECK(table[0].first == "constrained");
    CHECK_THROWS_AS(anchor_baselines(std::span(all).first(1), traces, m, SessionConfig{}), ValidationError);
    CHECK_THROWS_AS(anchor_baselines(all, std::span<const Trace>{}, m, SessionConfig{}), ValidationError);
  }

  TEST_CASE("agent rating against frozen baselines") {
    const RatingTable frozen{{"constrained", 1000.0}, {"bola", 1100.0}};
    const std::vector<BaselineMatch> one_win{{"constrained", Outcome::kAgent0}};
    CHECK(rate_agent(1000.0, frozen, one_win) == 1005.0);
    CHECK(rate_agent(1000.0, frozen, std::vector<BaselineMatch>{}) == 1000.0);

    std::vector<BaselineMatch> draws;
    for (int i = 0; i < 50; ++i) draws.push_back({i % 2 ? "bola" : "constrained", Outcome::kDraw});
    const double after = rate_agent(900.0, frozen, draws);
    CHECK(after > 900.0);
    CHECK(after < 1050.0);
    CHECK(rate_agent(1200.0, frozen, draws) < 1200.0);
    CHECK(frozen[1].second == 1100.0);

    const std::vector<BaselineMatch> unknown{{"pensieve", Outcome::kAgent0}};
    CHECK_THROWS_AS(rate_agent(1000.0, frozen, unknown), ValidationError);
  }
}
