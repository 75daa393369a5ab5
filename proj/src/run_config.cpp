#include "tiyuntsong/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <string>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

namespace {

enum class Kind { kInteger, kUnsigned, kNumber, kBoolean, kString, kObject, kArray };

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::kInteger: return "an integer";
    case Kind::kUnsigned: return "a non-negative integer";
    case Kind::kNumber: return "a number";
    case Kind::kBoolean: return "a boolean";
    case Kind::kString: return "a string";
    case Kind::kObject: return "an object";
    case Kind::kArray: return "an array";
  }
  return "";
}

bool matches(const nlohmann::json& v, Kind k) {
  switch (k) {
    case Kind::kInteger: return v.is_number_integer();
    case Kind::kUnsigned: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case Kind::kNumber: return v.is_number();
    case Kind::kBoolean: return v.is_boolean();
    case Kind::kString: return v.is_string();
    case Kind::kObject: return v.is_object();
    case Kind::kArray: return v.is_array();
  }
  return false;
}

using Shape = std::map<std::string, Kind>;

void check_object(const nlohmann::json& j, const Shape& shape, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    auto it = shape.find(key);
    if (it == shape.end()) throw ValidationError("unknown configuration key \"" + path + "\"");
    if (!matches(value, it->second))
      throw ValidationError("configuration key \"" + path + "\" must be " + kind_name(it->second));
  }
}

const Shape kTopShape = {{"schema_version", Kind::kInteger}, {"traces", Kind::kString},
                         {"validation_traces", Kind::kString}, {"split", Kind::kObject},
                         {"manifests", Kind::kArray},          {"manifest_synth", Kind::kObject},
                         {"train", Kind::kObject}};
const Shape kSplitShape = {{"train_ratio", Kind::kNumber}, {"val_ratio", Kind::kNumber}, {"seed", Kind::kUnsigned}};
const Shape kManifestSynthShape = {{"ladder_kbps", Kind::kArray},
                                   {"num_chunks", Kind::kInteger},
                                   {"chunk_duration_s", Kind::kNumber},
                                   {"vbr_jitter", Kind::kNumber},
                                   {"id", Kind::kString}};
const Shape kTrainShape = {{"epochs", Kind::kInteger},           {"matches_per_epoch", Kind::kInteger},
                           {"workers", Kind::kInteger},          {"seed", Kind::kUnsigned},
                           {"eval_every", Kind::kInteger},       {"checkpoint_every", Kind::kInteger},
                           {"elo_k", Kind::kNumber},             {"update_granularity", Kind::kString},
                           {"agent", Kind::kObject},             {"session", Kind::kObject}};
const Shape kSessionShape = {{"buffer_capacity_s", Kind::kNumber},
                             {"per_chunk_latency_s", Kind::kNumber},
                             {"history_len", Kind::kInteger}};
const Shape kAgentShape = {{"history_len", Kind::kInteger},
                           {"levels", Kind::kInteger},
                           {"gamma", Kind::kNumber},
                           {"entropy_weight", Kind::kNumber},
                           {"lr_policy", Kind::kNumber},
                           {"lr_value", Kind::kNumber},
                           {"lr_gan", Kind::kNumber},
                           {"n_step", Kind::kInteger},
                           {"reward_mode", Kind::kString},
                           {"use_gem", Kind::kBoolean},
                           {"throughput_scale_kbps", Kind::kNumber},
                           {"time_scale_s", Kind::kNumber},
                           {"size_scale_bits", Kind::kNumber},
                           {"win_buffer_capacity", Kind::kUnsigned},
                           {"gan_batch", Kind::kUnsigned}};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

void validate_run_config_json(const nlohmann::json& j) {
  check_object(j, kTopShape, "");
  if (!j.contains("schema_version")) throw ValidationError("configuration is missing \"schema_version\"");
  if (j.at("schema_version").get<int>() != kRunConfigSchemaVersion)
    throw ValidationError("unsupported schema_version " + j.at("schema_version").dump() + " (expected " +
                          std::to_string(kRunConfigSchemaVersion) + ")");
  if (!j.contains("traces")) throw ValidationError("configuration is missing \"traces\"");
  if (j.contains("split")) check_object(j.at("split"), kSplitShape, "split");
  if (j.contains("manifests"))
    for (const auto& m : j.at("manifests"))
      if (!m.is_string()) throw ValidationError("configuration key \"manifests\" must list path strings");
  if (j.contains("manifest_synth")) {
    check_object(j.at("manifest_synth"), kManifestSynthShape, "manifest_synth");
    if (j.at("manifest_synth").contains("ladder_kbps"))
      for (const auto& v : j.at("manifest_synth").at("ladder_kbps"))
        if (!v.is_number()) throw ValidationError("configuration key \"manifest_synth.ladder_kbps\" must list numbers");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_object(t, kTrainShape, "train");
    if (t.contains("agent")) check_object(t.at("agent"), kAgentShape, "train.agent");
    if (t.contains("session")) check_object(t.at("session"), kSessionShape, "train.session");
  }
}

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  validate_run_config_json(j);
  RunConfig cfg;
  cfg.traces = resolve(base_dir, j.at("traces").get<std::string>());
  if (j.contains("validation_traces"))
    cfg.validation_traces = resolve(base_dir, j.at("validation_traces").get<std::string>());
  if (j.contains("split")) {
    const auto& s = j.at("split");
    cfg.train_ratio = s.value("train_ratio", cfg.train_ratio);
    cfg.val_ratio = s.value("val_ratio", cfg.val_ratio);
    cfg.split_seed = s.value("seed", cfg.split_seed);
  }
  if (j.contains("manifests"))
    for (const auto& m : j.at("manifests")) cfg.manifests.push_back(resolve(base_dir, m.get<std::string>()));
  if (j.contains("manifest_synth")) cfg.manifest_synth = manifest_synth_config_from_json(j.at("manifest_synth"));
  if (j.contains("train")) {
    nlohmann::json t = j.at("train");
    // A session history length given only once applies to both sides.
    if (t.contains("session") && t["session"].contains("history_len") &&
        !(t.contains("agent") && t["agent"].contains("history_len")))
      t["agent"]["history_len"] = t["session"]["history_len"];
    if (t.contains("agent") && t["agent"].contains("history_len") &&
        !(t.contains("session") && t["session"].contains("history_len")))
      t["session"]["history_len"] = t["agent"]["history_len"];
    cfg.train = train_config_from_json(t);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open configuration " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

TrainData load_train_data(const RunConfig& cfg) {
  TrainData data;
  std::vector<Trace> all = load_trace_dir(cfg.traces);
  if (all.empty()) throw ValidationError("no traces found in " + cfg.traces.string());
  if (cfg.validation_traces) {
    data.train = std::move(all);
    data.validation = load_trace_dir(*cfg.validation_traces);
  } else {
    std::vector<std::string> ids;
    for (const auto& t : all) ids.push_back(t.id());
    const DatasetSplit split = split_dataset(ids, cfg.train_ratio, cfg.val_ratio, cfg.split_seed);
    auto pick = [&](const std::vector<std::string>& names) {
      std::vector<Trace> out;
      for (const auto& n : names)
        out.push_back(*std::find_if(all.begin(), all.end(), [&](const Trace& t) { return t.id() == n; }));
      return out;
    };
    data.train = pick(split.train);
    data.validation = pick(split.validation);
    // A split too small for a validation share reuses the training traces.
    if (data.validation.empty()) data.validation = data.train;
  }
  if (cfg.manifests.empty()) {
    data.manifests.push_back(synth_manifest(cfg.manifest_synth, cfg.split_seed));
  } else {
    for (const auto& p : cfg.manifests) data.manifests.push_back(load_manifest(p));
  }
  data.validate(cfg.train);
  return data;
}

}  // namespace tiyuntsong
