#pragma once

#include <cstdint>

#include "fist/maze.hpp"
#include "fist/trajectory.hpp"

namespace fist::maze {

struct DataGenConfig {
  std::int64_t n_transitions = 200000;
  double noise_std = 0.1;     // Gaussian action noise on the oracle controller
  int traj_max_steps = 400;   // cap per goal pursuit
  double start_jitter = 0.3;  // uniform jitter around the start cell center
  EnvConfig env;
};

// Offline skill corpus: independent trajectories, each a waypoint-controller
// rollout from a random free cell to a random free goal cell on the layout
// with `blocked` turned into walls. Trajectory i uses the RNG stream derived
// from (seed, i), so generation is a pure function of its arguments.
data::TrajectoryDataset generate_offline_data(const MazeLayout& layout, Region blocked,
                                              const DataGenConfig& cfg, std::uint64_t seed);

// Downstream demonstrations on the unblocked layout: m noise-free rollouts
// from random starts outside `goal_region` to the fixed goal cell inside it,
// each terminating on goal-radius arrival.
data::DemoSet generate_demos(const MazeLayout& layout, Region goal_region, int m,
                             const EnvConfig& env, std::uint64_t seed);

// Fixed evaluation start states: n free cells outside `exclude`, drawn
// without replacement from the stream derived from (seed, "starts").
std::vector<MazeState> sample_start_states(const MazeLayout& layout, Region exclude, int n,
                                           std::uint64_t seed);

}  // namespace fist::maze
