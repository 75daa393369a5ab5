#include "tiyuntsong/selfplay.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "tiyuntsong/error.hpp"

namespace tiyuntsong {

namespace {

const char* granularity_name(UpdateGranularity g) { return g == UpdateGranularity::kEpoch ? "epoch" : "match"; }

UpdateGranularity parse_granularity(const std::string& s) {
  if (s == "epoch") return UpdateGranularity::kEpoch;
  if (s == "match") return UpdateGranularity::kMatch;
  throw ValidationError("update_granularity must be \"epoch\" or \"match\", got \"" + s + "\"");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

// ---- configuration ----

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (matches_per_epoch < 1) throw ValidationError("matches_per_epoch must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (eval_every < 1) throw ValidationError("eval_every must be >= 1");
  if (checkpoint_every < 0) throw ValidationError("checkpoint_every must be >= 0");
  if (!(elo_k > 0.0)) throw ValidationError("elo_k must be positive");
  agent.validate();
  if (agent.history_len != session.history_len)
    throw ValidationError("agent history_len must equal session history_len");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"matches_per_epoch", c.matches_per_epoch},
          {"workers", c.workers},
          {"seed", c.seed},
          {"eval_every", c.eval_every},
          {"checkpoint_every", c.checkpoint_every},
          {"elo_k", c.elo_k},
          {"update_granularity", granularity_name(c.granularity)},
          {"agent", to_json(c.agent)},
          {"session", to_json(c.session)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("train config must be a JSON object");
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.matches_per_epoch = j.value("matches_per_epoch", c.matches_per_epoch);
    c.workers = j.value("workers", c.workers);
    c.seed = j.value("seed", c.seed);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.elo_k = j.value("elo_k", c.elo_k);
    c.granularity = parse_granularity(j.value("update_granularity", std::string(granularity_name(c.granularity))));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("train config: ") + e.what());
  }
  if (j.contains("session")) c.session = session_config_from_json(j.at("session"));
  if (j.contains("agent")) c.agent = agent_config_from_json(j.at("agent"));
  c.validate();
  return c;
}

void TrainData::validate(const TrainConfig& cfg) const {
  if (train.empty()) throw ValidationError("training set is empty");
  if (validation.empty()) throw ValidationError("validation set is empty");
  if (manifests.empty()) throw ValidationError("no manifests");
  for (const auto& m : manifests) {
    cfg.session.validate(m);
    if (static_cast<int>(m.num_levels()) != cfg.agent.levels)
      throw ValidationError("manifest " + m.id() + " has " + std::to_string(m.num_levels()) +
                            " levels, agent expects " + std::to_string(cfg.agent.levels));
  }
}

// ---- matches ----

MatchResult run_match(const Agent& a0, const Agent& a1, const Trace& trace, const Manifest& manifest,
                      const SessionConfig& session, ActMode mode, std::uint64_t seed0, std::uint64_t seed1) {
  MatchResult r;
  r.trajectory0 = a0.play(manifest, trace, session, mode, seed0);
  r.trajectory1 = a1.play(manifest, trace, session, mode, seed1);
  r.outcome = judge(r.trajectory0.metrics, r.trajectory1.metrics);
  return r;
}

std::vector<MatchSpec> sample_matches(std::uint64_t seed, int epoch, int matches, std::size_t num_traces,
                                      std::size_t num_manifests) {
  if (num_traces == 0 || num_manifests == 0) throw ValidationError("cannot sample matches from empty sets");
  std::vector<MatchSpec> out;
  for (int m = 0; m < matches; ++m) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(m)));
    MatchSpec s;
    s.trace = rng.index(num_traces);
    s.manifest = rng.index(num_manifests);
    s.seed0 = rng.next();
    s.seed1 = rng.next();
    out.push_back(s);
  }
  return out;
}

std::vector<MatchResult> collect_rollouts(const Agent& a0, const Agent& a1, std::span<const MatchSpec> specs,
                                          const TrainData& data, const SessionConfig& session, int workers) {
  if (workers < 1) throw ValidationError("workers must be >= 1");
  std::vector<MatchResult> results(specs.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < specs.size(); i += stride) {
      const auto& s = specs[i];
      results[i] = run_match(a0, a1, data.train.at(s.trace), data.manifests.at(s.manifest), session,
                             ActMode::kSample, s.seed0, s.seed1);
    }
  };
  const auto stride = static_cast<std::size_t>(workers);
  if (stride == 1) {
    work(0, 1);
    return results;
  }
  std::vector<std::exception_ptr> errors(stride);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < stride; ++w) {
    threads.emplace_back([&, w] {
      try {
        work(w, stride);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

// ---- epoch log ----

std::string epoch_log_header() {
  return "epoch,w0,w1,elo_a0,policy_loss,value_loss,g_loss,d_loss,"
         "mean_bitrate_0,mean_rebuffer_0,mean_change_0,mean_bitrate_1,mean_rebuffer_1,mean_change_1";
}

std::string epoch_log_row(const EpochReport& r) {
  const auto& a0 = r.agents[0];
  const auto& a1 = r.agents[1];
  std::string row = std::to_string(r.epoch);
  for (double v : {r.w0, r.w1, r.elo_a0, a0.loss.policy_loss, a0.loss.value_loss, a0.gem.g_loss, a0.gem.d_loss,
                   a0.mean_bitrate_kbps, a0.mean_rebuffer_s, a0.mean_change_kbps, a1.mean_bitrate_kbps,
                   a1.mean_rebuffer_s, a1.mean_change_kbps})
    row += "," + fmt(v);
  return row;
}

std::string epoch_log_anchor_row(double elo_a0) { return "0,,," + fmt(elo_a0) + ",,,,,,,,,,"; }

// ---- evaluation ----

nlohmann::json to_json(const EvalRecord& r) {
  auto side = [](const SessionMetrics& m) {
    return nlohmann::json{{"mean_bitrate_kbps", m.mean_bitrate_kbps()},
                          {"rebuffer_s", m.total_rebuffer_s},
                          {"mean_change_kbps", m.mean_change_kbps()},
                          {"totals", to_json(m)}};
  };
  return {{"trace", r.trace},
          {"opponent", r.opponent},
          {"outcome", outcome_name(r.outcome)},
          {"score", match_score(r.outcome, 0)},
          {"subject", side(r.subject)},
          {"opponent_metrics", side(r.opponent_metrics)}};
}

const OpponentSummary& Evaluation::against(const std::string& opponent) const {
  for (const auto& s : summary)
    if (s.opponent == opponent) return s;
  throw ValidationError("no evaluation against \"" + opponent + "\"");
}

Evaluation evaluate(const Contestant& subject, std::span<const Contestant> opponents, std::span<const Trace> traces,
                    const Manifest& manifest, const SessionConfig& session) {
  if (traces.empty()) throw ValidationError("evaluation needs at least one trace");
  if (opponents.empty()) throw ValidationError("evaluation needs at least one opponent");
  session.validate(manifest);
  Evaluation eval;
  for (const auto& o : opponents) eval.summary.push_back({o.name});
  for (const auto& trace : traces) {
    const Trajectory mine = subject.play(manifest, trace, session);
    for (std::size_t i = 0; i < opponents.size(); ++i) {
      const Trajectory theirs = opponents[i].play(manifest, trace, session);
      EvalRecord rec{trace.id(), opponents[i].name, judge(mine.metrics, theirs.metrics), mine.metrics,
                     theirs.metrics};
      auto& s = eval.summary[i];
      if (rec.outcome == Outcome::kAgent0) ++s.wins;
      else if (rec.outcome == Outcome::kAgent1) ++s.losses;
      else ++s.draws;
      eval.records.push_back(std::move(rec));
    }
  }
  for (auto& s : eval.summary)
    s.win_rate = (s.wins + 0.5 * s.draws) / static_cast<double>(s.wins + s.losses + s.draws);
  return eval;
}

Contestant agent_contestant(const Agent& agent, std::string name) {
  return {std::move(name), [&agent](const Manifest& m, const Trace& t, const SessionConfig& s) {
            return agent.play(m, t, s, ActMode::kGreedy, 0);
          }};
}

std::vector<BaselineMatch> baseline_matches(const Evaluation& eval) {
  std::vector<BaselineMatch> out;
  for (const auto& r : eval.records) out.push_back({r.opponent, r.outcome});
  return out;
}

void write_eval_jsonl(const Evaluation& eval, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : eval.records) out << to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---- trainer ----

Trainer::Trainer(TrainConfig cfg, TrainData data)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      agents_{Agent(cfg_.agent, mix_seed(cfg_.seed, 0xa0)), Agent(cfg_.agent, mix_seed(cfg_.seed, 0xa1))} {
  cfg_.validate();
  data_.validate(cfg_);
  for (BaselineKind kind : all_baselines()) baselines_.push_back(baseline_contestant(kind));
  anchors_ = anchor_baselines(baselines_, data_.validation, data_.manifests.front(), cfg_.session, cfg_.elo_k);
}

std::vector<MatchResult> Trainer::rollouts(int epoch) const {
  const auto specs = sample_matches(cfg_.seed, epoch, cfg_.matches_per_epoch, data_.train.size(),
                                    data_.manifests.size());
  return collect_rollouts(agents_[0], agents_[1], specs, data_, cfg_.session, cfg_.workers);
}

void Trainer::update_agent(int index, std::span<const MatchResult> results, double win_rate, int epoch,
                           AgentEpochStats& stats) {
  Agent& agent = agents_[index];
  AgentOptimizers& opt = optimizers_[index];
  const AgentConfig& acfg = agent.config();
  const auto specs = sample_matches(cfg_.seed, epoch, cfg_.matches_per_epoch, data_.train.size(),
                                    data_.manifests.size());
  const Outcome win = index == 0 ? Outcome::kAgent0 : Outcome::kAgent1;

  std::vector<NormalizationContext> contexts;
  for (const auto& s : specs) contexts.push_back(normalization_context(data_.manifests[s.manifest], cfg_.session));

  // Winning samples, then one GEM step on this epoch's (s_{t-1}, h_{t-1}) rows.
  std::vector<float> gem_rows;
  std::size_t gem_count = 0;
  for (std::size_t m = 0; m < results.size(); ++m) {
    const Trajectory& traj = index == 0 ? results[m].trajectory0 : results[m].trajectory1;
    collect_winning(agent.win_buffer(), traj, results[m].outcome == win);
    for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t) {
      const auto row = normalize(traj.steps[t].observation, acfg, contexts[m]);
      gem_rows.insert(gem_rows.end(), row.begin(), row.end());
      ++gem_count;
    }
  }
  if (acfg.use_gem && gem_count > 0) {
    nn::Tensor inputs({gem_count, acfg.input_dim()}, std::move(gem_rows));
    Rng rng(mix_seed(cfg_.seed, static_cast<std::uint64_t>(epoch), 0x6e00 + static_cast<std::uint64_t>(index)));
    GemStepConfig gcfg{acfg.lr_gan, acfg.lr_gan, acfg.gan_batch};
    stats.gem = update_gem(agent.generator(), agent.discriminator(), agent.win_buffer(), inputs, opt.generator,
                           opt.discriminator, gcfg, rng);
  } else {
    stats.gem.skipped = true;
  }

  std::vector<Episode> episodes;
  for (std::size_t m = 0; m < results.size(); ++m) {
    const Trajectory& traj = index == 0 ? results[m].trajectory0 : results[m].trajectory1;
    episodes.push_back(make_episode(traj, match_score(results[m].outcome, index), acfg, contexts[m]));
  }
  if (cfg_.granularity == UpdateGranularity::kEpoch) {
    stats.loss = update(agent, UpdateBatch{std::move(episodes), win_rate}, opt);
    return;
  }
  LossReport sum;
  int applied = 0;
  for (auto& e : episodes) {
    const LossReport r = update(agent, UpdateBatch{{std::move(e)}, win_rate}, opt);
    if (!r.applied) continue;
    sum.policy_loss += r.policy_loss;
    sum.value_loss += r.value_loss;
    sum.entropy += r.entropy;
    ++applied;
  }
  if (applied > 0) {
    sum.policy_loss /= applied;
    sum.value_loss /= applied;
    sum.entropy /= applied;
    sum.applied = true;
  }
  stats.loss = sum;
}

EpochReport Trainer::run_epoch(int epoch) {
  const std::vector<MatchResult> results = rollouts(epoch);
  std::vector<Outcome> outcomes;
  for (const auto& r : results) outcomes.push_back(r.outcome);
  const WinRates rates = win_rate(outcomes);

  EpochReport report;
  report.epoch = epoch;
  report.w0 = rates.w0;
  report.w1 = rates.w1;
  for (int i = 0; i < 2; ++i) {
    auto& stats = report.agents[i];
    for (const auto& r : results) {
      const SessionMetrics& m = i == 0 ? r.trajectory0.metrics : r.trajectory1.metrics;
      stats.mean_bitrate_kbps += m.mean_bitrate_kbps() / static_cast<double>(results.size());
      stats.mean_rebuffer_s += m.total_rebuffer_s / static_cast<double>(results.size());
      stats.mean_change_kbps += m.mean_change_kbps() / static_cast<double>(results.size());
    }
    update_agent(i, results, i == 0 ? rates.w0 : rates.w1, epoch, stats);
  }
  report.elo_a0 = elo_;
  return report;
}

Evaluation Trainer::evaluate_a0() {
  Evaluation eval = evaluate(agent_contestant(agents_[0]), baselines_, data_.validation, data_.manifests.front(),
                             cfg_.session);
  elo_ = rate_agent(elo_, anchors_, baseline_matches(eval), cfg_.elo_k);
  eval.elo = elo_;
  return eval;
}

TrainOutputs train(const TrainConfig& cfg, const TrainData& data, const std::optional<std::filesystem::path>& out_dir,
                   const EpochCallback& on_epoch) {
  Trainer trainer(cfg, data);
  TrainOutputs outputs;

  std::ofstream log;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    log.open(*out_dir / "epochs.csv", std::ios::trunc);
    if (!log) throw std::runtime_error("cannot write " + (*out_dir / "epochs.csv").string());
    log << epoch_log_header() << '\n';
    nlohmann::json ratings = nlohmann::json::object();
    for (const auto& [name, value] : trainer.baseline_ratings()) ratings[name] = value;
    std::ofstream r(*out_dir / "ratings.json", std::ios::trunc);
    r << ratings.dump(2) << '\n';
  }
  auto checkpoint = [&] {
    if (!out_dir) return;
    trainer.agent(0).save(*out_dir / "a0.ckpt");
    trainer.agent(1).save(*out_dir / "a1.ckpt");
  };

  outputs.final_evaluation = trainer.evaluate_a0();
  if (out_dir) log << epoch_log_anchor_row(trainer.elo()) << '\n' << std::flush;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochReport report = trainer.run_epoch(epoch);
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      outputs.final_evaluation = trainer.evaluate_a0();
      report.elo_a0 = trainer.elo();
    }
    if (out_dir) {
      log << epoch_log_row(report) << '\n' << std::flush;
      if (!log) throw std::runtime_error("epoch log write failed");
      if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) checkpoint();
    }
    if (on_epoch) on_epoch(report);
    outputs.epochs.push_back(report);
  }
  checkpoint();
  if (out_dir) write_eval_jsonl(outputs.final_evaluation, *out_dir / "eval.jsonl");
  return outputs;
}

}  // namespace tiyuntsong
