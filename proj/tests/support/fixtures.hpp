#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "tiyuntsong/random.hpp"
#include "tiyuntsong/simulator.hpp"
#include "tiyuntsong/workload.hpp"

namespace tiyuntsong::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("tiyuntsong-" + tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline Trace constant_trace(double kbps, double duration_s = 100.0, std::string id = "const") {
  return Trace(std::move(id), {{duration_s, kbps}});
}

/// Equal-sized chunks at each level: size = bitrate * chunk duration.
inline Manifest flat_manifest(std::vector<double> ladder_kbps, std::size_t chunks, double chunk_s = 4.0) {
  std::vector<std::vector<double>> sizes(chunks);
  for (auto& row : sizes)
    for (double b : ladder_kbps) row.push_back(b * chunk_s * 1000.0);
  return Manifest("flat", chunk_s, std::move(ladder_kbps), std::move(sizes));
}

/// Random manifest with 2..6 levels, 1..12 chunks and jittered sizes.
inline Manifest random_manifest(Rng& rng) {
  const std::size_t levels = 2 + rng.index(5);
  const std::size_t chunks = 1 + rng.index(12);
  const double chunk_s = rng.uniform(1.0, 6.0);
  std::vector<double> ladder;
  double kbps = rng.uniform(100.0, 600.0);
  for (std::size_t i = 0; i < levels; ++i) {
    ladder.push_back(kbps);
    kbps *= rng.uniform(1.2, 2.5);
  }
  std::vector<std::vector<double>> sizes(chunks);
  for (auto& row : sizes)
    for (double b : ladder) row.push_back(b * chunk_s * 1000.0 * rng.uniform(0.7, 1.3));
  return Manifest("random", chunk_s, std::move(ladder), std::move(sizes));
}

/// Random piecewise trace with 1..8 segments.
inline Trace random_trace(Rng& rng) {
  std::vector<TraceSample> samples(1 + rng.index(8));
  for (auto& s : samples) s = {rng.uniform(0.2, 15.0), rng.uniform(80.0, 8000.0)};
  return Trace("random", std::move(samples));
}

inline SessionConfig random_session_config(Rng& rng, const Manifest& m) {
  SessionConfig cfg;
  cfg.buffer_capacity_s = m.chunk_duration_s() * rng.uniform(1.1, 8.0);
  cfg.per_chunk_latency_s = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 0.5);
  cfg.history_len = 1 + static_cast<int>(rng.index(10));
  return cfg;
}

}  // namespace tiyuntsong::testing
