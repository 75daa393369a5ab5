#include <set>
#include <sstream>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "tiyuntsong/error.hpp"
#include "tiyuntsong/workload.hpp"

using namespace tiyuntsong;
using testing::TempDir;

TEST_SUITE("workload") {
  TEST_CASE("two-column rows become duration/bandwidth pairs; the last row takes the mean duration") {
    std::istringstream in("0 1.0\n2 2.0\n4 1.0\n");
    const Trace t = parse_two_column(in, "t");
    REQUIRE(t.size() == 3);
    CHECK(t.samples()[0] == TraceSample{2.0, 1000.0});
    CHECK(t.samples()[1] == TraceSample{2.0, 2000.0});
    CHECK(t.samples()[2] == TraceSample{2.0, 1000.0});
  }

  TEST_CASE("a single two-column row lasts one second") {
    std::istringstream in("7 3.5\n");
    const Trace t = parse_two_column(in, "t");
    REQUIRE(t.size() == 1);
    CHECK(t.samples()[0] == TraceSample{1.0, 3500.0});
  }

  TEST_CASE("two-column errors name the offending row") {
    auto message = [](const std::string& text) {
      std::istringstream in(text);
      try {
        parse_two_column(in, "t");
      } catch (const ValidationError& e) {
        return std::string(e.what());
      }
      return std::string("no error");
    };
    CHECK(message("0 1\n1 -1\n").find("row 2") != std::string::npos);
    CHECK(message("0 1\n0 2\n").find("row 2") != std::string::npos);
    CHECK(message("0 1\n\n2 x\n").find("row 3") != std::string::npos);
    CHECK(message("0 1 5\n").find("row 1") != std::string::npos);
    CHECK(message("").find("no rows") != std::string::npos);
  }

  TEST_CASE("canonical JSON round-trips a trace exactly") {
    TempDir dir("workload");
    const Trace one("one", {{4.0, 500.0}});
    save_trace(one, dir / "one.json");
    CHECK(load_trace(dir / "one.json", TraceFormat::kCanonicalJson) == one);

    Rng rng(3);
    const Trace random = testing::random_trace(rng);
    save_trace(random, dir / "r.json");
    CHECK(load_trace(dir / "r.json", TraceFormat::kCanonicalJson) == random);
  }

  TEST_CASE("trace invariants are enforced with the sample index") {
    CHECK_THROWS_AS(Trace("e", {}), ValidationError);
    CHECK_THROWS_WITH_AS(Trace("z", {{1.0, 10.0}, {0.0, 10.0}}), doctest::Contains("sample 1"), ValidationError);
    CHECK_THROWS_WITH_AS(Trace("n", {{1.0, -10.0}}), doctest::Contains("sample 0"), ValidationError);
    CHECK_THROWS_AS(trace_from_json(nlohmann::json{{"id", "x"}}), ValidationError);
    CHECK_THROWS_AS(trace_from_json(nlohmann::json{{"id", "x"}, {"samples", {{{"duration_s", 1}}}}}), ValidationError);
  }

  TEST_CASE("bandwidth lookup is piecewise constant and wraps") {
    const Trace t("t", {{2.0, 1000.0}, {2.0, 2000.0}});
    CHECK(bandwidth_at(t, 0.5) == 1000.0);
    CHECK(bandwidth_at(t, 3.0) == 2000.0);
    CHECK(bandwidth_at(t, 4.5) == 1000.0);
    CHECK(bandwidth_at(t, 2.0) == 2000.0);
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(0.0, 40.0);
      CHECK(bandwidth_at(t, x) == bandwidth_at(t, x + t.total_duration_s()));
    }
  }

  TEST_CASE("trace directory loading is sorted by file name and skips other files") {
    TempDir dir("tracedir");
    save_trace(Trace("b", {{1.0, 1.0}}), dir / "b.json");
    save_trace(Trace("a", {{1.0, 2.0}}), dir / "a.json");
    testing::write_file(dir / "notes.txt", "ignored");
    const auto traces = load_trace_dir(dir.path());
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].id() == "a");
    CHECK(traces[1].id() == "b");
    CHECK_THROWS_AS(load_trace_dir(dir / "missing"), ValidationError);
  }

  TEST_CASE("a single-state synthetic trace is constant") {
    TraceSynthConfig cfg;
    cfg.num_states = 1;
    cfg.min_kbps = cfg.max_kbps = 1000.0;
    cfg.duration_s = 10.0;
    const Trace t = synth_trace(cfg, 5);
    REQUIRE(t.size() == 1);
    CHECK(t.samples()[0] == TraceSample{10.0, 1000.0});
  }

  TEST_CASE("synthetic traces are seed-deterministic, seed-sensitive and in range") {
    TraceSynthConfig cfg;
    cfg.num_states = 4;
    CHECK(synth_trace(cfg, 1) == synth_trace(cfg, 1));
    CHECK_FALSE(synth_trace(cfg, 1) == synth_trace(cfg, 2));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Trace t = synth_trace(cfg, seed);
      CHECK(t.total_duration_s() == doctest::Approx(cfg.duration_s).epsilon(1e-12));
      for (const auto& s : t.samples()) {
        CHECK(s.bandwidth_kbps >= cfg.min_kbps);
        CHECK(s.bandwidth_kbps <= cfg.max_kbps);
      }
      for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.samples()[i].bandwidth_kbps != t.samples()[i - 1].bandwidth_kbps);
    }
  }

  TEST_CASE("invalid synthesis settings are rejected") {
    TraceSynthConfig cfg;
    cfg.num_states = 0;
    CHECK_THROWS_AS(synth_trace(cfg, 0), ValidationError);
    cfg = {};
    cfg.min_kbps = 5000;
    cfg.max_kbps = 100;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.mean_dwell_s = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }

  TEST_CASE("split sizes follow floor rounding") {
    std::vector<std::string> ten;
    for (int i = 0; i < 10; ++i) ten.push_back("t" + std::to_string(i));
    DatasetSplit s = split_dataset(ten, 0.8, 0.2, 0);
    CHECK(s.train.size() == 8);
    CHECK(s.validation.size() == 2);
    CHECK(s.test.empty());

    s = split_dataset({"only"}, 0.8, 0.2, 0);
    CHECK(s.train.size() == 1);
    CHECK(s.validation.empty());
    CHECK(s.test.empty());

    s = split_dataset(ten, 0.5, 0.25, 0);
    CHECK(s.train.size() == 5);
    CHECK(s.validation.size() == 2);
    CHECK(s.test.size() == 3);
  }

  TEST_CASE("splits are deterministic partitions") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::string> ids;
      const std::size_t n = 1 + rng.index(40);
      for (std::size_t i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
      const double tr = rng.uniform(0.05, 0.9);
      const double va = rng.uniform(0.01, 1.0 - tr);
      const std::uint64_t seed = rng.next();
      const DatasetSplit s = split_dataset(ids, tr, va, seed);
      const DatasetSplit again = split_dataset(ids, tr, va, seed);
      CHECK(s.train == again.train);
      CHECK(s.validation == again.validation);
      std::multiset<std::string> all(s.train.begin(), s.train.end());
      all.insert(s.validation.begin(), s.validation.end());
      all.insert(s.test.begin(), s.test.end());
      CHECK(all == std::multiset<std::string>(ids.begin(), ids.end()));
    }
    CHECK_THROWS_AS(split_dataset({}, 0.8, 0.2, 0), ValidationError);
    CHECK_THROWS_AS(split_dataset({"a"}, 0.9, 0.2, 0), ValidationError);
    CHECK_THROWS_AS(split_dataset({"a", "a"}, 0.5, 0.5, 0), ValidationError);
  }

  TEST_CASE("synthetic manifest sizes are bitrate times duration") {
    ManifestSynthConfig cfg;
    cfg.ladder_kbps = {300, 750};
    cfg.num_chunks = 2;
    cfg.chunk_duration_s = 4.0;
    const Manifest m = synth_manifest(cfg, 0);
    REQUIRE(m.num_chunks() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(m.chunk_size(c, 0) == 1.2e6);
      CHECK(m.chunk_size(c, 1) == 3.0e6);
    }
    CHECK(m.total_duration_s() == 8.0);
  }

  TEST_CASE("manifests round-trip and reject bad ladders") {
    TempDir dir("manifest");
    ManifestSynthConfig cfg;
    cfg.vbr_jitter = 0.2;
    const Manifest m = synth_manifest(cfg, 4);
    save_manifest(m, dir / "m.json");
    CHECK(load_manifest(dir / "m.json") == m);

    cfg.ladder_kbps = {750, 300};
    CHECK_THROWS_AS(synth_manifest(cfg, 0), ValidationError);
    cfg = {};
    cfg.num_chunks = 0;
    CHECK_THROWS_AS(synth_manifest(cfg, 0), ValidationError);
    CHECK_THROWS_AS(Manifest("m", 4.0, {300, 750}, {{1.0}}), ValidationError);
    CHECK_THROWS_AS(Manifest("m", 4.0, {300}, {{0.0}}), ValidationError);
  }

  TEST_CASE("trace format names") {
    CHECK(parse_trace_format("two-column-text") == TraceFormat::kTwoColumnText);
    CHECK(parse_trace_format("canonical-json") == TraceFormat::kCanonicalJson);
    CHECK_THROWS_AS(parse_trace_format("csv"), ValidationError);
  }
}
