#include "doctest.h"
#include "support/fixtures.hpp"
#include "tiyuntsong/baselines.hpp"
#include "tiyuntsong/error.hpp"

using namespace tiyuntsong;

namespace {

const std::vector<double> kLadder{300, 750, 1200, 1850, 2850, 4300};

Observation with_throughput(std::vector<double> history) {
  Observation o;
  o.throughput_kbps = std::move(history);
  return o;
}

Observation with_buffer(double buffer_s, const std::vector<double>& ladder, double chunk_s = 4.0) {
  Observation o;
  o.buffer_s = buffer_s;
  for (double b : ladder) o.next_sizes_bits.push_back(b * chunk_s * 1000.0);
  o.throughput_kbps = {900.0, 2500.0, 1300.0};
  return o;
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("constrained picks the lower middle level") {
    const Observation o;
    CHECK(constrained(o, kLadder) == 2);
    CHECK(constrained(o, std::vector<double>{1, 2, 3, 4, 5}) == 2);
    CHECK(constrained(o, std::vector<double>{1}) == 0);
    CHECK(constrained(o, std::vector<double>{1, 2}) == 0);
  }

  TEST_CASE("throughput rule uses the harmonic mean of the last five samples") {
    const Observation o = with_throughput({0, 0, 9999, 1000, 2000, 1000, 2000, 1000});
    CHECK(harmonic_mean_throughput(o) == doctest::Approx(1250.0).epsilon(1e-12));
    CHECK(throughput_rule(o, kLadder) == 2);
    CHECK(throughput_rule(with_throughput({0, 0, 0}), kLadder) == 0);
    CHECK(throughput_rule(with_throughput({1e9}), kLadder) == 5);
    CHECK(throughput_rule(with_throughput({100}), kLadder) == 0);
    CHECK(harmonic_mean_throughput(with_throughput({0, 0, 500, 0})) == 500.0);
  }

  TEST_CASE("throughput rule is monotone in the history") {
    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> h(10);
      for (auto& x : h) x = rng.uniform() < 0.2 ? 0.0 : rng.uniform(50, 6000);
      std::vector<double> raised = h;
      const double factor = rng.uniform(1.0, 3.0);
      for (auto& x : raised) x *= factor;
      CHECK(throughput_rule(with_throughput(raised), kLadder) >= throughput_rule(with_throughput(h), kLadder));
    }
  }

  TEST_CASE("bola prefers the bottom on an empty buffer and the top when full") {
    const BolaParams p = bola_params(25.0, 4.0, kLadder);
    CHECK(p.gp == 5.0);
    CHECK(p.v == doctest::Approx((25.0 / 4.0 - 1.0) / (std::log(4300.0 / 300.0) + 5.0)).epsilon(1e-12));
    CHECK(bola(with_buffer(0.0, kLadder), p) == 0);
    CHECK(bola(with_buffer(25.0 - 4.0, kLadder), p) == 5);
    CHECK(bola(with_buffer(25.0, kLadder), p) >= 4);
    CHECK(bola(with_buffer(10.0, std::vector<double>{800}), p) == 0);
  }

  TEST_CASE("bola level never decreases as the buffer grows") {
    const BolaParams p = bola_params(25.0, 4.0, kLadder);
    int previous = 0;
    for (double b = 0.0; b <= 25.0; b += 0.25) {
      const int level = bola(with_buffer(b, kLadder), p);
      CHECK(level >= previous);
      previous = level;
    }
  }

  TEST_CASE("dynamic switches from throughput to bola at ten seconds") {
    const BolaParams p = bola_params(25.0, 4.0, kLadder);
    for (double b : {0.0, 2.0, 9.99}) {
      const Observation o = with_buffer(b, kLadder);
      CHECK(dynamic_dash(o, kLadder, p) == throughput_rule(o, kLadder));
    }
    for (double b : {10.0, 20.0}) {
      const Observation o = with_buffer(b, kLadder);
      CHECK(dynamic_dash(o, kLadder, p) == bola(o, p));
    }
  }

  TEST_CASE("every baseline returns a valid level on random observations") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
      const Manifest m = testing::random_manifest(rng);
      SessionConfig cfg = testing::random_session_config(rng, m);
      Observation o;
      o.buffer_s = rng.uniform(0.0, cfg.buffer_capacity_s);
      auto sizes = m.chunk_sizes(0);
      o.next_sizes_bits.assign(sizes.begin(), sizes.end());
      for (int i = 0; i < cfg.history_len; ++i) o.throughput_kbps.push_back(rng.uniform(0.0, 9000.0));
      for (BaselineKind k : all_baselines()) {
        const Policy policy = make_baseline_policy(k, m, cfg);
        const int level = policy(o);
        CHECK(level >= 0);
        CHECK(static_cast<std::size_t>(level) < m.num_levels());
        CHECK(policy(o) == level);
      }
    }
  }

  TEST_CASE("baseline names") {
    for (BaselineKind k : all_baselines()) CHECK(parse_baseline(baseline_name(k)) == k);
    CHECK(baseline_name(BaselineKind::kDynamicDash) == "dynamic");
    CHECK_THROWS_WITH_AS(parse_baseline("pensieve"), doctest::Contains("constrained"), ValidationError);
  }
}
