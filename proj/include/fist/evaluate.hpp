#pragma once

#include "fist/episode.hpp"

namespace fist::imitator {

struct EpisodeLogEntry {
  std::string policy;
  std::string task;
  int start_id = 0;
  int repeat = 0;
  int length = 0;
  bool success = false;
  std::uint64_t seed = 0;
  int resample_period = 1;
};

// Aggregates over n_starts x repeats episodes. Length spread uses the sample
// standard deviation (n-1); standard error is that over sqrt(n). Success
// spread is the sample standard deviation of the 0/1 outcomes.
struct EvalRow {
  std::string policy;
  std::string task;
  int episodes = 0;
  double mean_length = 0.0;
  double length_std = 0.0;
  double length_stderr = 0.0;
  double success_rate = 0.0;
  double success_std = 0.0;
  double normalized_score = 0.0;  // mean of (max_steps - length) / max_steps
  int resample_period = 1;
  std::uint64_t seed = 0;
};

// (max_length - length) / max_length; lengths past max_length are an error.
double normalized_score(int episode_length, int max_length);

// Runs the fixed starts (x repeats), in parallel when cfg.jobs > 1. Episode
// k uses the RNG stream derived from (cfg.seed, k), so results do not depend
// on the thread count.
EvalRow evaluate(PolicyKind kind, const PolicyArtifacts& art, const EvalConfig& cfg,
                 const std::vector<maze::MazeState>& starts,
                 std::vector<EpisodeLogEntry>* log = nullptr);

// Recomputation helper used by reporting and its tests.
EvalRow aggregate(const std::string& policy, const std::string& task,
                  const std::vector<EpisodeLogEntry>& entries, int max_steps);

}  // namespace fist::imitator
