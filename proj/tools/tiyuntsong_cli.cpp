// tiyuntsong: trace synthesis, self-play training, evaluation and
// round-robin tournaments for ABR policies.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime
// failure. Errors are written to stderr as one JSON object per line.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tiyuntsong/agent.hpp"
#include "tiyuntsong/baselines.hpp"
#include "tiyuntsong/elo.hpp"
#include "tiyuntsong/error.hpp"
#include "tiyuntsong/run_config.hpp"
#include "tiyuntsong/selfplay.hpp"
#include "tiyuntsong/workload.hpp"

namespace fs = std::filesystem;
using namespace tiyuntsong;

namespace {

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Manifest manifest_or_default(const std::string& path) {
  return path.empty() ? synth_manifest(ManifestSynthConfig{}, 0) : load_manifest(path);
}

std::vector<Trace> traces_from(const std::string& dir) {
  auto traces = load_trace_dir(dir);
  if (traces.empty()) throw ValidationError("no traces found in " + dir);
  return traces;
}

nlohmann::json summary_json(const Evaluation& eval) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : eval.summary)
    rows.push_back({{"opponent", s.opponent},
                    {"win_rate", s.win_rate},
                    {"wins", s.wins},
                    {"losses", s.losses},
                    {"draws", s.draws}});
  return rows;
}

// ---- commands ----

struct SynthArgs {
  int count = 0;
  std::uint64_t seed = 0;
  std::string out;
  TraceSynthConfig cfg;
};

void run_synth(const SynthArgs& a) {
  if (a.count < 1) throw ValidationError("--count must be >= 1");
  a.cfg.validate();
  fs::create_directories(a.out);
  for (int i = 0; i < a.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trace_%04d", i);
    const Trace t = synth_trace(a.cfg, mix_seed(a.seed, static_cast<std::uint64_t>(i)), name);
    save_trace(t, fs::path(a.out) / (std::string(name) + ".json"));
  }
}

struct ConvertArgs {
  std::string in, format = "two-column-text", out;
};

void run_convert(const ConvertArgs& a) {
  const Trace t = load_trace(a.in, parse_trace_format(a.format));
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  save_trace(t, a.out);
}

struct TrainArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs, workers;
};

void run_train(const TrainArgs& a) {
  RunConfig cfg = load_run_config(a.config);
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.workers) cfg.train.workers = *a.workers;
  cfg.train.validate();
  const TrainData data = load_train_data(cfg);
  fs::create_directories(a.out);
  write_json_file(fs::path(a.out) / "resolved_config.json", to_json(cfg.train));
  const TrainOutputs result = train(cfg.train, data, fs::path(a.out));
  nlohmann::json summary = {{"epochs", cfg.train.epochs},
                            {"elo_a0", result.final_evaluation.elo},
                            {"win_rates", summary_json(result.final_evaluation)}};
  std::cout << summary.dump() << '\n';
}

struct EvaluateArgs {
  std::string checkpoint, traces, baselines = "constrained,throughput,bola,dynamic", out, manifest;
};

void run_evaluate(const EvaluateArgs& a) {
  std::vector<Contestant> opponents;
  for (const auto& name : split_list(a.baselines)) opponents.push_back(baseline_contestant(parse_baseline(name)));
  if (opponents.empty()) throw ValidationError("--baselines lists no baselines");
  const Agent agent = Agent::load(a.checkpoint);
  const auto traces = traces_from(a.traces);
  const Manifest manifest = manifest_or_default(a.manifest);
  SessionConfig session;
  session.history_len = agent.config().history_len;

  std::vector<Contestant> all;
  for (BaselineKind k : all_baselines()) all.push_back(baseline_contestant(k));
  const RatingTable anchors = anchor_baselines(all, traces, manifest, session);
  Evaluation eval = evaluate(agent_contestant(agent), opponents, traces, manifest, session);
  eval.elo = rate_agent(kInitialRating, anchors, baseline_matches(eval));

  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_eval_jsonl(eval, a.out);
  std::cout << nlohmann::json{{"elo", eval.elo}, {"win_rates", summary_json(eval)}}.dump() << '\n';
}

struct TournamentArgs {
  std::string policies, traces, out, manifest;
};

void run_tournament(const TournamentArgs& a) {
  const auto names = split_list(a.policies);
  if (names.size() < 2) throw ValidationError("a tournament needs at least 2 policies");
  std::vector<Agent> agents;
  agents.reserve(names.size());
  std::vector<Contestant> contestants;
  for (const auto& name : names) {
    if (fs::path(name).extension() == ".ckpt") {
      agents.push_back(Agent::load(name));
      contestants.push_back(agent_contestant(agents.back(), fs::path(name).stem().string()));
    } else {
      contestants.push_back(baseline_contestant(parse_baseline(name)));
    }
  }
  const auto traces = traces_from(a.traces);
  const Manifest manifest = manifest_or_default(a.manifest);
  SessionConfig session;
  if (!agents.empty()) session.history_len = agents.front().config().history_len;
  const RatingTable table = anchor_baselines(contestants, traces, manifest, session);

  std::vector<std::size_t> order(table.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return table[x].second > table[y].second; });
  nlohmann::json ratings = nlohmann::json::array();
  double sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& [name, rating] = table[order[rank]];
    ratings.push_back({{"rank", rank + 1}, {"policy", name}, {"rating", rating}});
    sum += rating;
  }
  const nlohmann::json result = {{"ratings", ratings}, {"rating_sum", sum}, {"traces", traces.size()}};
  write_json_file(a.out, result);
  std::cout << result.dump() << '\n';
}

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-play ABR training and evaluation"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-traces", "Write Markov-chain bandwidth traces as canonical JSON");
  synth_cmd->add_option("--count", synth.count, "Number of traces")->required();
  synth_cmd->add_option("--seed", synth.seed, "Master seed");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--states", synth.cfg.num_states, "Number of bandwidth states");
  synth_cmd->add_option("--min-kbps", synth.cfg.min_kbps, "Lowest state bandwidth");
  synth_cmd->add_option("--max-kbps", synth.cfg.max_kbps, "Highest state bandwidth");
  synth_cmd->add_option("--mean-dwell", synth.cfg.mean_dwell_s, "Mean state dwell time in seconds");
  synth_cmd->add_option("--duration", synth.cfg.duration_s, "Trace length in seconds");

  ConvertArgs convert;
  auto* convert_cmd = app.add_subcommand("convert-trace", "Convert a trace file to canonical JSON");
  convert_cmd->add_option("--in", convert.in, "Input file")->required();
  convert_cmd->add_option("--format", convert.format, "Input format: two-column-text or canonical-json");
  convert_cmd->add_option("--out", convert.out, "Output file")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Run self-play training");
  train_cmd->add_option("--config", train_args.config, "Run configuration (JSON)")->required();
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--seed", train_args.seed, "Override the configured seed");
  train_cmd->add_option("--epochs", train_args.epochs, "Override the configured epoch count");
  train_cmd->add_option("--workers", train_args.workers, "Override the configured rollout worker count");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Play a trained agent against baselines");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Agent checkpoint")->required();
  eval_cmd->add_option("--traces", eval_args.traces, "Directory of canonical-JSON traces")->required();
  eval_cmd->add_option("--baselines", eval_args.baselines, "Comma-separated baseline names");
  eval_cmd->add_option("--out", eval_args.out, "Per-match JSON-lines output")->required();
  eval_cmd->add_option("--manifest", eval_args.manifest, "Video manifest (default: synthetic)");

  TournamentArgs tour;
  auto* tour_cmd = app.add_subcommand("tournament", "Round-robin Elo ratings");
  tour_cmd->add_option("--policies", tour.policies, "Comma-separated baseline names or .ckpt paths")->required();
  tour_cmd->add_option("--traces", tour.traces, "Directory of canonical-JSON traces")->required();
  tour_cmd->add_option("--out", tour.out, "Ratings JSON output")->required();
  tour_cmd->add_option("--manifest", tour.manifest, "Video manifest (default: synthetic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("validation", e.what(), 1);
  }

  try {
    if (*synth_cmd) run_synth(synth);
    else if (*convert_cmd) run_convert(convert);
    else if (*train_cmd) run_train(train_args);
    else if (*eval_cmd) run_evaluate(eval_args);
    else if (*tour_cmd) run_tournament(tour);
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 2);
  }
  return 0;
}
