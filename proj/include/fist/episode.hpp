#pragma once

#include <array>
#include <optional>
#include <string>

#include "fist/bc.hpp"
#include "fist/distance.hpp"
#include "fist/maze.hpp"
#include "fist/skill_model.hpp"

namespace fist::imitator {

enum class PolicyKind {
  fist,
  fist_euc,
  fist_no_ft,
  fist_no_pretrain,
  fist_oracle,
  spirl,
  spirl_closest,
  spirl_hstep,
  bc_ft,
  goal_bc,
};

PolicyKind policy_from_string(const std::string& s);
std::string to_string(PolicyKind k);
bool is_fist_variant(PolicyKind k);
bool is_spirl_variant(PolicyKind k);

struct EvalConfig {
  int max_steps = 2000;
  int resample_period = 1;  // in [1, H]
  int n_starts = 10;
  int repeats = 1;
  double goal_radius = 0.5;
  std::uint64_t seed = 0;
  bool deterministic_skill = false;  // use prior means instead of samples
  bool keep_traces = false;
  int jobs = 1;

  void validate(int H) const;
};

struct EpisodeResult {
  int length = 0;
  bool success = false;
  std::vector<std::array<double, 4>> trace;  // populated when keep_traces
};

// Everything an episode might need; evaluate() checks per-kind requirements
// and raises MissingArtifactError naming the gap.
struct PolicyArtifacts {
  const skills::SkillModel* skill = nullptr;        // fine-tuned (variant-dependent)
  const skills::SkillModel* spirl = nullptr;        // state-only-prior model
  const metric::DemoIndex* index = nullptr;         // contrastive or euclidean
  const BcPolicy* bc = nullptr;
  const BcPolicy* goal_bc = nullptr;
  const maze::MazeLayout* layout = nullptr;         // unblocked evaluation world
  maze::EnvConfig env;
  data::GoalDescriptor goal;
};

// Names the first missing artifact for this policy kind, if any.
std::optional<std::string> missing_artifact(PolicyKind kind, const PolicyArtifacts& art);

EpisodeResult run_episode(PolicyKind kind, const PolicyArtifacts& art, const EvalConfig& cfg,
                          const maze::MazeState& start, Rng rng);

// Spec-level entry points.
EpisodeResult run_fist_episode(const PolicyArtifacts& art, const EvalConfig& cfg,
                               const maze::MazeState& start, Rng rng);
enum class SpirlLookup { none, closest, hstep };
EpisodeResult run_spirl_episode(const PolicyArtifacts& art, const EvalConfig& cfg,
                                const maze::MazeState& start, Rng rng, SpirlLookup lookup);

}  // namespace fist::imitator
