#include "tiyuntsong/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "tiyuntsong/error.hpp"
#include "tiyuntsong/random.hpp"

namespace tiyuntsong {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Trace::Trace(std::string id, std::vector<TraceSample> samples)
    : id_(std::move(id)), samples_(std::move(samples)) {
  if (samples_.empty()) throw ValidationError("trace '" + id_ + "' has no samples");
  ends_.reserve(samples_.size());
  double t = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!positive_finite(samples_[i].duration_s))
      throw ValidationError("trace '" + id_ + "' sample " + std::to_string(i) + ": duration must be positive");
    if (!positive_finite(samples_[i].bandwidth_kbps))
      throw ValidationError("trace '" + id_ + "' sample " + std::to_string(i) + ": bandwidth must be positive");
    t += samples_[i].duration_s;
    ends_.push_back(t);
  }
}

std::size_t Trace::segment_index(double offset_s) const {
  auto it = std::upper_bound(ends_.begin(), ends_.end(), offset_s);
  if (it == ends_.end()) return ends_.size() - 1;
  return static_cast<std::size_t>(it - ends_.begin());
}

TraceFormat parse_trace_format(const std::string& name) {
  if (name == "canonical-json" || name == "json") return TraceFormat::kCanonicalJson;
  if (name == "two-column-text" || name == "text") return TraceFormat::kTwoColumnText;
  throw ValidationError("unknown trace format '" + name + "' (valid: canonical-json, two-column-text)");
}

Trace parse_two_column(std::istream& in, std::string id) {
  std::vector<double> times;
  std::vector<double> kbps;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;  // blank
    auto fail = [&](const std::string& why) {
      throw ValidationError("row " + std::to_string(row) + ": " + why);
    };
    if (!(fields >> b) || (fields >> extra)) fail("expected two columns 'time_s throughput_mbps'");
    double t = 0.0, mbps = 0.0;
    try {
      std::size_t used_a = 0, used_b = 0;
      t = std::stod(a, &used_a);
      mbps = std::stod(b, &used_b);
      if (used_a != a.size() || used_b != b.size()) fail("malformed number");
    } catch (const std::logic_error&) {
      fail("malformed number");
    }
    if (!std::isfinite(t) || t < 0.0) fail("time must be a finite non-negative number");
    if (!times.empty() && !(t > times.back())) fail("timestamps must be strictly increasing");
    if (!positive_finite(mbps)) fail("throughput must be positive");
    times.push_back(t);
    kbps.push_back(mbps * 1000.0);
  }
  if (times.empty()) throw ValidationError("trace '" + id + "': no rows");

  std::vector<TraceSample> samples;
  samples.reserve(times.size());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    double d = times[i + 1] - times[i];
    sum += d;
    samples.push_back({d, kbps[i]});
  }
  double last = samples.empty() ? 1.0 : sum / static_cast<double>(samples.size());
  samples.push_back({last, kbps.back()});
  return Trace(std::move(id), std::move(samples));
}

Trace trace_from_json(const nlohmann::json& j) {
  auto id = required<std::string>(j, "id");
  if (!j.contains("samples") || !j.at("samples").is_array())
    throw ValidationError("trace '" + id + "': 'samples' must be an array");
  std::vector<TraceSample> samples;
  for (const auto& s : j.at("samples")) {
    samples.push_back({required<double>(s, "duration_s"), required<double>(s, "bandwidth_kbps")});
  }
  return Trace(std::move(id), std::move(samples));
}

nlohmann::json to_json(const Trace& trace) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : trace.samples())
    samples.push_back({{"duration_s", s.duration_s}, {"bandwidth_kbps", s.bandwidth_kbps}});
  return {{"id", trace.id()}, {"samples", std::move(samples)}};
}

Trace load_trace(const std::filesystem::path& path, TraceFormat format) {
  if (format == TraceFormat::kCanonicalJson) return trace_from_json(read_json_file(path));
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_two_column(in, path.stem().string());
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  write_text_file(path, to_json(trace).dump(1) + "\n");
}

std::vector<Trace> load_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Trace> traces;
  traces.reserve(files.size());
  for (const auto& f : files) traces.push_back(load_trace(f, TraceFormat::kCanonicalJson));
  return traces;
}

double bandwidth_at(const Trace& trace, double t) {
  double offset = std::fmod(t, trace.total_duration_s());
  if (offset < 0.0) offset = 0.0;
  return trace.samples()[trace.segment_index(offset)].bandwidth_kbps;
}

void TraceSynthConfig::validate() const {
  if (num_states < 1) throw ValidationError("num_states must be >= 1");
  if (!positive_finite(min_kbps) || !positive_finite(max_kbps) || min_kbps > max_kbps)
    throw ValidationError("bandwidth range must be positive with min <= max");
  if (!positive_finite(mean_dwell_s)) throw ValidationError("mean_dwell_s must be positive");
  if (!positive_finite(duration_s)) throw ValidationError("duration_s must be positive");
}

nlohmann::json to_json(const TraceSynthConfig& cfg) {
  return {{"num_states", cfg.num_states},
          {"min_kbps", cfg.min_kbps},
          {"max_kbps", cfg.max_kbps},
          {"mean_dwell_s", cfg.mean_dwell_s},
          {"duration_s", cfg.duration_s}};
}

TraceSynthConfig trace_synth_config_from_json(const nlohmann::json& j) {
  TraceSynthConfig cfg;
  cfg.num_states = j.value("num_states", cfg.num_states);
  cfg.min_kbps = j.value("min_kbps", cfg.min_kbps);
  cfg.max_kbps = j.value("max_kbps", cfg.max_kbps);
  cfg.mean_dwell_s = j.value("mean_dwell_s", cfg.mean_dwell_s);
  cfg.duration_s = j.value("duration_s", cfg.duration_s);
  cfg.validate();
  return cfg;
}

Trace synth_trace(const TraceSynthConfig& cfg, std::uint64_t seed, std::string id) {
  cfg.validate();
  Rng rng(seed);
  std::vector<double> levels(static_cast<std::size_t>(cfg.num_states));
  for (auto& level : levels) level = rng.uniform(cfg.min_kbps, cfg.max_kbps);

  std::vector<TraceSample> samples;
  std::size_t state = rng.index(levels.size());
  double t = 0.0;
  while (t < cfg.duration_s) {
    double dwell = std::min(rng.exponential(cfg.mean_dwell_s), cfg.duration_s - t);
    if (dwell <= 0.0) break;
    if (!samples.empty() && samples.back().bandwidth_kbps == levels[state])
      samples.back().duration_s += dwell;
    else
      samples.push_back({dwell, levels[state]});
    t += dwell;
    if (levels.size() > 1) {
      std::size_t next = rng.index(levels.size() - 1);
      state = next >= state ? next + 1 : next;
    }
  }
  return Trace(std::move(id), std::move(samples));
}

DatasetSplit split_dataset(std::vector<std::string> ids, double train_ratio, double val_ratio,
                           std::uint64_t seed) {
  if (ids.empty()) throw ValidationError("split_dataset: empty input set");
  auto in_unit = [](double r) { return std::isfinite(r) && r > 0.0 && r < 1.0; };
  if (!in_unit(train_ratio) || !in_unit(val_ratio))
    throw ValidationError("split ratios must lie in (0, 1)");
  constexpr double kTol = 1e-9;
  if (train_ratio + val_ratio > 1.0 + kTol) throw ValidationError("split ratios must sum to <= 1");
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size())
    throw ValidationError("split_dataset: duplicate ids");

  Rng rng(seed);
  for (std::size_t i = ids.size() - 1; i > 0; --i) std::swap(ids[i], ids[rng.index(i + 1)]);

  const double n = static_cast<double>(ids.size());
  auto n_train = static_cast<std::size_t>(std::floor(train_ratio * n + kTol));
  auto n_val = static_cast<std::size_t>(std::floor(val_ratio * n + kTol));
  n_val = std::min(n_val, ids.size() - n_train);
  if (std::abs(train_ratio + val_ratio - 1.0) <= kTol) n_train = ids.size() - n_val;

  DatasetSplit split;
  auto first = ids.begin();
  split.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(first + static_cast<std::ptrdiff_t>(n_train),
                          first + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  return split;
}

Manifest::Manifest(std::string id, double chunk_duration_s, std::vector<double> ladder_kbps,
                   std::vector<std::vector<double>> chunk_sizes_bits)
    : id_(std::move(id)),
      chunk_duration_s_(chunk_duration_s),
      ladder_kbps_(std::move(ladder_kbps)),
      chunk_sizes_bits_(std::move(chunk_sizes_bits)) {
  if (!positive_finite(chunk_duration_s_)) throw ValidationError("manifest '" + id_ + "': chunk duration must be positive");
  if (ladder_kbps_.empty()) throw ValidationError("manifest '" + id_ + "': empty ladder");
  for (std::size_t i = 0; i < ladder_kbps_.size(); ++i) {
    if (!positive_finite(ladder_kbps_[i])) throw ValidationError("manifest '" + id_ + "': ladder entries must be positive");
    if (i > 0 && !(ladder_kbps_[i] > ladder_kbps_[i - 1]))
      throw ValidationError("manifest '" + id_ + "': ladder must be strictly increasing");
  }
  if (chunk_sizes_bits_.empty()) throw ValidationError("manifest '" + id_ + "': zero chunks");
  for (std::size_t c = 0; c < chunk_sizes_bits_.size(); ++c) {
    if (chunk_sizes_bits_[c].size() != ladder_kbps_.size())
      throw ValidationError("manifest '" + id_ + "': chunk " + std::to_string(c) + " has wrong level count");
    for (double s : chunk_sizes_bits_[c])
      if (!positive_finite(s)) throw ValidationError("manifest '" + id_ + "': chunk " + std::to_string(c) + " has non-positive size");
  }
}

Manifest manifest_from_json(const nlohmann::json& j) {
  return Manifest(required<std::string>(j, "id"), required<double>(j, "chunk_duration_s"),
                  required<std::vector<double>>(j, "ladder_kbps"),
                  required<std::vector<std::vector<double>>>(j, "chunk_sizes_bits"));
}

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json sizes = nlohmann::json::array();
  for (std::size_t c = 0; c < m.num_chunks(); ++c) {
    auto row = m.chunk_sizes(c);
    sizes.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"id", m.id()},
          {"chunk_duration_s", m.chunk_duration_s()},
          {"ladder_kbps", std::vector<double>(m.ladder_kbps().begin(), m.ladder_kbps().end())},
          {"chunk_sizes_bits", std::move(sizes)}};
}

Manifest load_manifest(const std::filesystem::path& path) { return manifest_from_json(read_json_file(path)); }

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  write_text_file(path, to_json(manifest).dump() + "\n");
}

nlohmann::json to_json(const ManifestSynthConfig& cfg) {
  return {{"ladder_kbps", cfg.ladder_kbps},
          {"num_chunks", cfg.num_chunks},
          {"chunk_duration_s", cfg.chunk_duration_s},
          {"vbr_jitter", cfg.vbr_jitter},
          {"id", cfg.id}};
}

ManifestSynthConfig manifest_synth_config_from_json(const nlohmann::json& j) {
  ManifestSynthConfig cfg;
  cfg.ladder_kbps = j.value("ladder_kbps", cfg.ladder_kbps);
  cfg.num_chunks = j.value("num_chunks", cfg.num_chunks);
  cfg.chunk_duration_s = j.value("chunk_duration_s", cfg.chunk_duration_s);
  cfg.vbr_jitter = j.value("vbr_jitter", cfg.vbr_jitter);
  cfg.id = j.value("id", cfg.id);
  return cfg;
}

Manifest synth_manifest(const ManifestSynthConfig& cfg, std::uint64_t seed) {
  if (cfg.num_chunks < 1) throw ValidationError("synth_manifest: zero chunks");
  if (!(cfg.vbr_jitter >= 0.0 && cfg.vbr_jitter < 1.0)) throw ValidationError("vbr_jitter must lie in [0, 1)");
  Rng rng(seed);
  std::vector<std::vector<double>> sizes(static_cast<std::size_t>(cfg.num_chunks));
  for (auto& row : sizes) {
    row.reserve(cfg.ladder_kbps.size());
    for (double kbps : cfg.ladder_kbps) {
      double jitter = cfg.vbr_jitter > 0.0 ? rng.uniform(1.0 - cfg.vbr_jitter, 1.0 + cfg.vbr_jitter) : 1.0;
      row.push_back(kbps * cfg.chunk_duration_s * 1000.0 * jitter);
    }
  }
  // The constructor validates the ladder.
  return Manifest(cfg.id, cfg.chunk_duration_s, cfg.ladder_kbps, std::move(sizes));
}

}  // namespace tiyuntsong
