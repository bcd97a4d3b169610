#include "fist/evaluate.hpp"

#include <cmath>
#include <thread>

#include "fist/errors.hpp"

namespace fist::imitator {

double normalized_score(int episode_length, int max_length) {
  if (max_length <= 0) throw ConfigError("normalized_score: max_length must be positive");
  if (episode_length < 0 || episode_length > max_length) {
    throw ConfigError("normalized_score: length " + std::to_string(episode_length) +
                      " outside [0, " + std::to_string(max_length) + "]");
  }
  return static_cast<double>(max_length - episode_length) / static_cast<double>(max_length);
}

EvalRow evaluate(PolicyKind kind, const PolicyArtifacts& art, const EvalConfig& cfg,
                 const std::vector<maze::MazeState>& starts,
                 std::vector<EpisodeLogEntry>* log) {
  if (auto missing = missing_artifact(kind, art)) throw MissingArtifactError(*missing);
  if (static_cast<int>(starts.size()) != cfg.n_starts) {
    throw ConfigError("evaluate: expected " + std::to_string(cfg.n_starts) + " starts, got " +
                      std::to_string(starts.size()));
  }
  const int total = cfg.n_starts * cfg.repeats;
  std::vector<EpisodeResult> results(total);
  Rng master(cfg.seed);

  auto run_range = [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k) {
      const int start_id = k % cfg.n_starts;
      results[k] = run_episode(kind, art, cfg, starts[start_id],
                               master.derive(0xe915 + static_cast<std::uint64_t>(k)));
    }
  };

  const int jobs = std::min(cfg.jobs, total);
  if (jobs <= 1) {
    run_range(0, total);
  } else {
    std::vector<std::thread> workers;
    const int chunk = (total + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      const int lo = w * chunk;
      const int hi = std::min(total, lo + chunk);
      if (lo < hi) workers.emplace_back(run_range, lo, hi);
    }
    for (auto& t : workers) t.join();
  }

  std::vector<EpisodeLogEntry> entries;
  entries.reserve(total);
  for (int k = 0; k < total; ++k) {
    EpisodeLogEntry e;
    e.policy = to_string(kind);
    e.task = art.goal.region;
    e.start_id = k % cfg.n_starts;
    e.repeat = k / cfg.n_starts;
    e.length = results[k].length;
    e.success = results[k].success;
    e.seed = cfg.seed;
    e.resample_period = cfg.resample_period;
    entries.push_back(e);
  }
  if (log) log->insert(log->end(), entries.begin(), entries.end());
  EvalRow row = aggregate(to_string(kind), art.goal.region, entries, cfg.max_steps);
  row.resample_period = cfg.resample_period;
  row.seed = cfg.seed;
  return row;
}

EvalRow aggregate(const std::string& policy, const std::string& task,
                  const std::vector<EpisodeLogEntry>& entries, int max_steps) {
  if (entries.empty()) throw ConfigError("aggregate: no episodes");
  EvalRow row;
  row.policy = policy;
  row.task = task;
  row.episodes = static_cast<int>(entries.size());
  const double n = static_cast<double>(entries.size());

  double len_sum = 0.0, succ_sum = 0.0, score_sum = 0.0;
  for (const auto& e : entries) {
    len_sum += e.length;
    succ_sum += e.success ? 1.0 : 0.0;
    score_sum += normalized_score(e.length, max_steps);
  }
  row.mean_length = len_sum / n;
  row.success_rate = succ_sum / n;
  row.normalized_score = score_sum / n;

  if (entries.size() > 1) {
    double len_var = 0.0, succ_var = 0.0;
    for (const auto& e : entries) {
      len_var += (e.length - row.mean_length) * (e.length - row.mean_length);
      const double s = e.success ? 1.0 : 0.0;
      succ_var += (s - row.success_rate) * (s - row.success_rate);
    }
    row.length_std = std::sqrt(len_var / (n - 1.0));
    row.success_std = std::sqrt(succ_var / (n - 1.0));
    row.length_stderr = row.length_std / std::sqrt(n);
  }
  return row;
}

}  // namespace fist::imitator
