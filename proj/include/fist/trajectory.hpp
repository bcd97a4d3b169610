#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fist/rng.hpp"

namespace fist::data {

// One rollout: T aligned (state, action) pairs. Stored as 32-bit floats so
// that on-disk round trips are bit-identical; arithmetic upcasts to double.
struct Trajectory {
  int state_dim = 0;
  int action_dim = 0;
  std::vector<float> states;   // T x state_dim, row-major
  std::vector<float> actions;  // T x action_dim, row-major

  int length() const {
    return state_dim == 0 ? 0 : static_cast<int>(states.size()) / state_dim;
  }
  std::span<const float> state(int t) const {
    return {states.data() + static_cast<std::size_t>(t) * state_dim,
            static_cast<std::size_t>(state_dim)};
  }
  std::span<const float> action(int t) const {
    return {actions.data() + static_cast<std::size_t>(t) * action_dim,
            static_cast<std::size_t>(action_dim)};
  }
  void append(std::span<const double> s, std::span<const double> a);
  void truncate(int new_length);
};

struct DatasetMeta {
  int state_dim = 0;
  int action_dim = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct TrajectoryDataset {
  DatasetMeta meta;
  std::vector<Trajectory> trajectories;

  std::int64_t total_transitions() const;
  std::int64_t window_count(int H) const;
};

struct GoalDescriptor {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.5;
  std::string region;
};

struct DemoSet {
  DatasetMeta meta;
  std::vector<Trajectory> demos;
  GoalDescriptor goal;
};

// View of H consecutive (state, action) pairs plus their source location.
struct SubTrajectory {
  const Trajectory* traj = nullptr;
  int traj_index = 0;
  int start = 0;
  int H = 0;

  std::span<const float> state(int k) const { return traj->state(start + k); }
  std::span<const float> action(int k) const { return traj->action(start + k); }
};

// Uniform over all (trajectory, start) windows of length H, sampled with
// replacement. Trajectories shorter than H contribute no windows. Throws a
// ConfigError when no window exists.
std::vector<SubTrajectory> sample_subtrajectories(const std::vector<Trajectory>& trajectories,
                                                  int H, int batch_size, Rng& rng);
std::vector<SubTrajectory> sample_subtrajectories(const TrajectoryDataset& ds, int H,
                                                  int batch_size, Rng& rng);

// Every valid window, in (trajectory, start) order.
std::vector<SubTrajectory> all_subtrajectories(const std::vector<Trajectory>& trajectories, int H);

using StatePredicate = std::function<bool(std::span<const float>)>;

// Splits each trajectory at region-entering states and keeps the maximal
// contiguous segments that stay outside; segments shorter than min_len drop.
TrajectoryDataset filter_region(const TrajectoryDataset& ds, const StatePredicate& in_region,
                                int min_len);

}  // namespace fist::data
