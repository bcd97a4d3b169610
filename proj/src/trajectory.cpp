#include "fist/trajectory.hpp"

#include "fist/errors.hpp"

namespace fist::data {

void Trajectory::append(std::span<const double> s, std::span<const double> a) {
  if (static_cast<int>(s.size()) != state_dim || static_cast<int>(a.size()) != action_dim) {
    throw ConfigError("Trajectory::append: dimension mismatch");
  }
  for (double v : s) states.push_back(static_cast<float>(v));
  for (double v : a) actions.push_back(static_cast<float>(v));
}

void Trajectory::truncate(int new_length) {
  states.resize(static_cast<std::size_t>(new_length) * state_dim);
  actions.resize(static_cast<std::size_t>(new_length) * action_dim);
}

std::int64_t TrajectoryDataset::total_transitions() const {
  std::int64_t n = 0;
  for (const auto& t : trajectories) n += t.length();
  return n;
}

std::int64_t TrajectoryDataset::window_count(int H) const {
  std::int64_t n = 0;
  for (const auto& t : trajectories) n += std::max(0, t.length() - H + 1);
  return n;
}

std::vector<SubTrajectory> sample_subtrajectories(const std::vector<Trajectory>& trajectories,
                                                  int H, int batch_size, Rng& rng) {
  std::vector<std::int64_t> cumulative;  // windows up to and including trajectory i
  cumulative.reserve(trajectories.size());
  std::int64_t total = 0;
  for (const auto& t : trajectories) {
    total += std::max(0, t.length() - H + 1);
    cumulative.push_back(total);
  }
  if (total == 0) {
    throw ConfigError("sample_subtrajectories: no trajectory of length >= H=" + std::to_string(H));
  }
  std::vector<SubTrajectory> out;
  out.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    const std::int64_t r = rng.uniform_int(total);
    std::size_t ti = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), r + 1) - cumulative.begin());
    const std::int64_t before = ti == 0 ? 0 : cumulative[ti - 1];
    out.push_back(SubTrajectory{&trajectories[ti], static_cast<int>(ti),
                                static_cast<int>(r - before), H});
  }
  return out;
}

std::vector<SubTrajectory> sample_subtrajectories(const TrajectoryDataset& ds, int H,
                                                  int batch_size, Rng& rng) {
  return sample_subtrajectories(ds.trajectories, H, batch_size, rng);
}

std::vector<SubTrajectory> all_subtrajectories(const std::vector<Trajectory>& trajectories,
                                               int H) {
  std::vector<SubTrajectory> out;
  for (std::size_t ti = 0; ti < trajectories.size(); ++ti) {
    const int n = trajectories[ti].length() - H + 1;
    for (int s = 0; s < n; ++s) {
      out.push_back(SubTrajectory{&trajectories[ti], static_cast<int>(ti), s, H});
    }
  }
  return out;
}

TrajectoryDataset filter_region(const TrajectoryDataset& ds, const StatePredicate& in_region,
                                int min_len) {
  TrajectoryDataset out;
  out.meta = ds.meta;
  for (const auto& traj : ds.trajectories) {
    int seg_start = -1;
    const int T = traj.length();
    auto flush = [&](int end) {  // segment [seg_start, end)
      if (seg_start >= 0 && end - seg_start >= min_len) {
        Trajectory seg;
        seg.state_dim = traj.state_dim;
        seg.action_dim = traj.action_dim;
        seg.states.assign(traj.states.begin() + static_cast<std::size_t>(seg_start) * traj.state_dim,
                          traj.states.begin() + static_cast<std::size_t>(end) * traj.state_dim);
        seg.actions.assign(
            traj.actions.begin() + static_cast<std::size_t>(seg_start) * traj.action_dim,
            traj.actions.begin() + static_cast<std::size_t>(end) * traj.action_dim);
        out.trajectories.push_back(std::move(seg));
      }
      seg_start = -1;
    };
    for (int t = 0; t < T; ++t) {
      if (in_region(traj.state(t))) {
        flush(t);
      } else if (seg_start < 0) {
        seg_start = t;
      }
    }
    flush(T);
  }
  return out;
}

}  // namespace fist::data
