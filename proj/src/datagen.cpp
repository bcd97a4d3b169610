#include "fist/datagen.hpp"

#include <sstream>

#include "fist/errors.hpp"
#include "fist/hashing.hpp"

namespace fist::maze {

namespace {

constexpr int kStateDim = 4;   // x, y, vx, vy
constexpr int kActionDim = 2;  // ax, ay

std::string datagen_digest(const DataGenConfig& cfg, Region blocked, const MazeLayout& layout) {
  std::ostringstream s;
  s << "datagen|" << to_string(blocked) << '|' << cfg.n_transitions << '|' << cfg.noise_std << '|'
    << cfg.traj_max_steps << '|' << cfg.start_jitter << '|' << cfg.env.dt << '|' << cfg.env.v_max
    << '|' << cfg.env.goal_radius << '|' << cfg.env.kp << '|' << cfg.env.kd << '|'
    << cfg.env.waypoint_radius << '|' << layout.text();
  return fnv1a_hex(s.str());
}

void record(data::Trajectory& traj, const MazeState& s, const MazeAction& a) {
  const double sv[] = {s.x, s.y, s.vx, s.vy};
  const double av[] = {a.ax, a.ay};
  traj.append(sv, av);
}

// One goal pursuit with the PD waypoint controller, optional action noise.
// The path is replanned from the current cell every step and the controller
// aims at the next cell on it; a frozen waypoint list can strand the point
// behind a wall after an overshoot into a neighboring corridor.
data::Trajectory rollout_to_goal(const MazeLayout& layout, MazeState state, Cell goal,
                                 const DataGenConfig& cfg, Rng& rng, bool terminal_pair) {
  data::Trajectory traj;
  traj.state_dim = kStateDim;
  traj.action_dim = kActionDim;
  const double gx = goal.col + 0.5;
  const double gy = goal.row + 0.5;
  for (int t = 0; t < cfg.traj_max_steps; ++t) {
    auto path = plan_waypoints(layout, layout.cell_at(state.x, state.y), goal);
    std::size_t wp = path.size() > 1 ? 1 : 0;
    MazeAction a = waypoint_policy(state, path, wp, cfg.env);
    if (cfg.noise_std > 0.0) {
      a.ax = std::clamp(a.ax + rng.gaussian(0.0, cfg.noise_std), -1.0, 1.0);
      a.ay = std::clamp(a.ay + rng.gaussian(0.0, cfg.noise_std), -1.0, 1.0);
    }
    record(traj, state, a);
    state = step(state, a, layout, cfg.env);
    if (goal_distance(state, gx, gy) < cfg.env.goal_radius) {
      if (terminal_pair) record(traj, state, MazeAction{});
      break;
    }
  }
  return traj;
}

}  // namespace

data::TrajectoryDataset generate_offline_data(const MazeLayout& layout, Region blocked,
                                              const DataGenConfig& cfg, std::uint64_t seed) {
  const MazeLayout world = layout.blocked(blocked);
  const auto cells = world.free_cells();
  data::TrajectoryDataset ds;
  ds.meta = {kStateDim, kActionDim, seed, datagen_digest(cfg, blocked, layout)};

  Rng master(seed);
  std::int64_t recorded = 0;
  for (std::uint64_t ti = 0; recorded < cfg.n_transitions; ++ti) {
    Rng rng = master.derive(ti);
    const Cell start = cells[rng.uniform_int(static_cast<std::int64_t>(cells.size()))];
    Cell goal = start;
    while (goal == start) {
      goal = cells[rng.uniform_int(static_cast<std::int64_t>(cells.size()))];
    }
    MazeState s0 = state_at_cell(start, &rng, cfg.start_jitter);
    data::Trajectory traj = rollout_to_goal(world, s0, goal, cfg, rng, /*terminal_pair=*/false);
    if (traj.length() == 0) continue;
    if (recorded + traj.length() > cfg.n_transitions) {
      traj.truncate(static_cast<int>(cfg.n_transitions - recorded));
    }
    recorded += traj.length();
    ds.trajectories.push_back(std::move(traj));
  }
  return ds;
}

data::DemoSet generate_demos(const MazeLayout& layout, Region goal_region, int m,
                             const EnvConfig& env, std::uint64_t seed) {
  if (m < 1) throw ConfigError("generate_demos: m must be >= 1");
  const Cell goal = layout.region_goal_cell(goal_region);
  const auto starts = layout.free_cells_excluding(goal_region);

  data::DemoSet set;
  set.meta = {kStateDim, kActionDim, seed, ""};
  set.goal = {goal.col + 0.5, goal.row + 0.5, env.goal_radius, to_string(goal_region)};

  DataGenConfig cfg;
  cfg.env = env;
  cfg.noise_std = 0.0;  // expert demonstrations
  cfg.traj_max_steps = env.max_steps;

  std::ostringstream digest;
  digest << "demos|" << to_string(goal_region) << '|' << m << '|' << layout.text();
  set.meta.config_hash = fnv1a_hex(digest.str());

  Rng master(seed);
  for (int i = 0; i < m; ++i) {
    Rng rng = master.derive(static_cast<std::uint64_t>(i));
    const Cell start = starts[rng.uniform_int(static_cast<std::int64_t>(starts.size()))];
    MazeState s0 = state_at_cell(start, &rng, cfg.start_jitter);
    data::Trajectory traj = rollout_to_goal(layout, s0, goal, cfg, rng, /*terminal_pair=*/true);
    const MazeState last{traj.state(traj.length() - 1)[0], traj.state(traj.length() - 1)[1], 0, 0};
    if (goal_distance(last, set.goal.x, set.goal.y) >= env.goal_radius) {
      throw PlanningError("demo " + std::to_string(i) + " failed to reach the goal within " +
                          std::to_string(cfg.traj_max_steps) + " steps");
    }
    set.demos.push_back(std::move(traj));
  }
  return set;
}

std::vector<MazeState> sample_start_states(const MazeLayout& layout, Region exclude, int n,
                                           std::uint64_t seed) {
  auto cells = layout.free_cells_excluding(exclude);
  if (n > static_cast<int>(cells.size())) {
    throw ConfigError("sample_start_states: asked for more starts than free cells");
  }
  Rng rng = Rng(seed).derive(0x57a275ULL);
  // partial Fisher-Yates for n distinct cells
  std::vector<MazeState> out;
  for (int i = 0; i < n; ++i) {
    const auto j = i + rng.uniform_int(static_cast<std::int64_t>(cells.size()) - i);
    std::swap(cells[i], cells[j]);
    out.push_back(state_at_cell(cells[i]));
  }
  return out;
}

}  // namespace fist::maze
