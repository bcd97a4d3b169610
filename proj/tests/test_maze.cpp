#include <doctest.h>

#include <cmath>
#include <set>

#include "fist/datagen.hpp"
#include "fist/errors.hpp"
#include "fist/maze.hpp"

using namespace fist;
using namespace fist::maze;

namespace {

// Independent shortest-path oracle: Bellman-Ford style relaxation over the
// free cells, no queue discipline shared with the BFS implementation.
int brute_force_shortest(const MazeLayout& L, Cell start, Cell goal) {
  const int n = L.rows() * L.cols();
  std::vector<int> dist(n, 1 << 20);
  auto idx = [&](Cell c) { return c.row * L.cols() + c.col; };
  dist[idx(start)] = 0;
  for (int pass = 0; pass < n; ++pass) {
    bool changed = false;
    for (int r = 0; r < L.rows(); ++r) {
      for (int c = 0; c < L.cols(); ++c) {
        if (L.wall(r, c)) continue;
        const Cell here{r, c};
        for (const Cell nb : {Cell{r - 1, c}, Cell{r + 1, c}, Cell{r, c - 1}, Cell{r, c + 1}}) {
          if (L.wall(nb.row, nb.col)) continue;
          if (dist[idx(nb)] + 1 < dist[idx(here)]) {
            dist[idx(here)] = dist[idx(nb)] + 1;
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
  }
  return dist[idx(goal)];
}

}  // namespace

TEST_CASE("default layout invariants") {
  MazeLayout L = MazeLayout::default_layout();
  CHECK(L.rows() == 10);
  CHECK(L.cols() == 13);
  CHECK(L.connected());
  for (Region r : {Region::left, Region::right, Region::bottom}) {
    CHECK(!L.region_cells(r).empty());
    MazeLayout b = L.blocked(r);
    CHECK(b.connected());  // blocking one arm must not disconnect the rest
    CHECK(b.region_cells(r).empty());
    Cell goal = L.region_goal_cell(r);
    CHECK(L.region_tag(goal.row, goal.col) == r);
  }
}

TEST_CASE("layout parse rejects malformed inputs") {
  CHECK_THROWS_AS(MazeLayout::parse("###\n#.#\n#.\n###\n"), ConfigError);   // ragged
  CHECK_THROWS_AS(MazeLayout::parse("###\n#x#\n###\n"), ConfigError);       // bad char
  CHECK_THROWS_AS(MazeLayout::parse("#.#\n#.#\n###\n"), ConfigError);       // open border
  CHECK_THROWS_AS(MazeLayout::parse("#####\n#.#.#\n#####\n"), ConfigError); // disconnected
}

TEST_CASE("dynamics: fixed point and free flight") {
  MazeLayout L = MazeLayout::default_layout();
  EnvConfig cfg;

  MazeState rest{2.5, 1.5, 0.0, 0.0};
  MazeState still = step(rest, MazeAction{0.0, 0.0}, L, cfg);
  CHECK(still.x == doctest::Approx(2.5));
  CHECK(still.y == doctest::Approx(1.5));
  CHECK(still.vx == 0.0);
  CHECK(still.vy == 0.0);

  // dt = 0.1, v = (1, 0), x = (2, 2) -> (2.1, 2) with no acceleration
  MazeState fly{2.0, 2.0, 1.0, 0.0};
  MazeLayout open = MazeLayout::parse("#####\n#...#\n#...#\n#...#\n#####\n");
  MazeState next = step(fly, MazeAction{0.0, 0.0}, open, cfg);
  CHECK(next.x == doctest::Approx(2.1));
  CHECK(next.y == doctest::Approx(2.0));
}

TEST_CASE("head-on wall collision zeroes the normal velocity component") {
  // single free cell surrounded by walls
  MazeLayout box = MazeLayout::parse("###\n#.#\n###\n");
  EnvConfig cfg;
  struct Push {
    double vx, vy;
  };
  for (const Push p : {Push{2.0, 0.0}, Push{-2.0, 0.0}, Push{0.0, 2.0}, Push{0.0, -2.0}}) {
    MazeState s{1.5, 1.5, p.vx, p.vy};
    for (int i = 0; i < 5; ++i) s = step(s, MazeAction{0.0, 0.0}, box, cfg);
    if (p.vx != 0.0) CHECK(s.vx == 0.0);
    if (p.vy != 0.0) CHECK(s.vy == 0.0);
    CHECK(!box.wall_at(s.x, s.y));
  }
}

TEST_CASE("dynamics never place the point inside a wall (random fuzz)") {
  MazeLayout L = MazeLayout::default_layout();
  EnvConfig cfg;
  Rng rng(99);
  const auto cells = L.free_cells();
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Cell c = cells[rng.uniform_int(static_cast<std::int64_t>(cells.size()))];
    MazeState s = state_at_cell(c, &rng, 0.45);
    for (int t = 0; t < 50; ++t) {
      MazeAction a{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
      s = step(s, a, L, cfg);
      REQUIRE(!L.wall_at(s.x, s.y));
      REQUIRE(std::hypot(s.vx, s.vy) <= cfg.v_max + 1e-12);
      ++checked;
    }
  }
  CHECK(checked == 100000);
}

TEST_CASE("plan_waypoints basics") {
  MazeLayout open = MazeLayout::parse("#######\n#.....#\n#.....#\n#.....#\n#.....#\n#.....#\n#######\n");
  auto trivial = plan_waypoints(open, {1, 1}, {1, 1});
  CHECK(trivial.size() == 1);

  auto row_path = plan_waypoints(open, {1, 1}, {1, 4});
  CHECK(row_path.size() == 4);

  // goal inside a blocked arm is no longer a free cell
  MazeLayout blocked = MazeLayout::default_layout().blocked(Region::left);
  Cell left_goal = MazeLayout::default_layout().region_goal_cell(Region::left);
  CHECK_THROWS_AS(plan_waypoints(blocked, {1, 1}, left_goal), PlanningError);
}

TEST_CASE("plan_waypoints matches brute-force oracle, including a U-shaped obstacle") {
  MazeLayout u_maze = MazeLayout::parse(
      "######\n"
      "#....#\n"
      "#.##.#\n"
      "#.#..#\n"
      "#.#.##\n"
      "######\n");
  auto path = plan_waypoints(u_maze, {4, 3}, {1, 1});
  CHECK(static_cast<int>(path.size()) == brute_force_shortest(u_maze, {4, 3}, {1, 1}) + 1);

  // all free-cell pairs on a few small layouts
  for (const char* text : {
           "######\n#....#\n#.##.#\n#.#..#\n#.#.##\n######\n",
           "#####\n#...#\n#.#.#\n#...#\n#####\n",
           "######\n#.#..#\n#.#.##\n#....#\n######\n",
       }) {
    MazeLayout L = MazeLayout::parse(text);
    auto cells = L.free_cells();
    for (const Cell& a : cells) {
      for (const Cell& b : cells) {
        auto p = plan_waypoints(L, a, b);
        CHECK(static_cast<int>(p.size()) == brute_force_shortest(L, a, b) + 1);
      }
    }
  }
}

TEST_CASE("waypoint_policy steers toward the current waypoint") {
  EnvConfig cfg;
  std::vector<Cell> path{{1, 1}, {1, 2}};
  std::size_t idx = 0;

  // at the final waypoint center with zero velocity -> action ~ 0
  MazeState at_goal{2.5, 1.5, 0.0, 0.0};
  idx = 1;
  MazeAction a0 = waypoint_policy(at_goal, path, idx, cfg);
  CHECK(idx == 1);
  CHECK(a0.ax == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(a0.ay == doctest::Approx(0.0).epsilon(1e-9));

  // waypoint directly to the right -> positive ax, zero ay
  MazeState left_of{1.5, 1.5, 0.0, 0.0};
  idx = 1;
  MazeAction a1 = waypoint_policy(left_of, path, idx, cfg);
  CHECK(a1.ax > 0.0);
  CHECK(a1.ay == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(waypoint_policy(at_goal, {}, idx, cfg), ConfigError);
}

TEST_CASE("closed-loop waypoint rollout reaches every goal cell") {
  MazeLayout L = MazeLayout::default_layout();
  EnvConfig cfg;
  Rng rng(7);
  const auto cells = L.free_cells();
  for (int trial = 0; trial < 10; ++trial) {
    Cell start = cells[rng.uniform_int(static_cast<std::int64_t>(cells.size()))];
    Cell goal = cells[rng.uniform_int(static_cast<std::int64_t>(cells.size()))];
    auto path = plan_waypoints(L, start, goal);
    MazeState s = state_at_cell(start);
    std::size_t wp = 0;
    bool reached = false;
    for (int t = 0; t < cfg.max_steps; ++t) {
      s = step(s, waypoint_policy(s, path, wp, cfg), L, cfg);
      if (goal_distance(s, goal.col + 0.5, goal.row + 0.5) < cfg.goal_radius) {
        reached = true;
        break;
      }
    }
    CHECK(reached);
  }
}

TEST_CASE("offline data generation") {
  MazeLayout L = MazeLayout::default_layout();
  DataGenConfig cfg;
  cfg.n_transitions = 3000;

  SUBCASE("zero transitions -> empty dataset") {
    cfg.n_transitions = 0;
    auto ds = generate_offline_data(L, Region::left, cfg, 1);
    CHECK(ds.trajectories.empty());
    CHECK(ds.total_transitions() == 0);
  }

  SUBCASE("blocked region is never visited") {
    auto ds = generate_offline_data(L, Region::left, cfg, 2);
    CHECK(ds.total_transitions() == 3000);
    for (const auto& traj : ds.trajectories) {
      for (int t = 0; t < traj.length(); ++t) {
        auto s = traj.state(t);
        CHECK(!L.in_region(s[0], s[1], Region::left));
      }
    }
  }

  SUBCASE("same seed twice is bit-identical") {
    auto a = generate_offline_data(L, Region::bottom, cfg, 3);
    auto b = generate_offline_data(L, Region::bottom, cfg, 3);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
      CHECK(a.trajectories[i].states == b.trajectories[i].states);
      CHECK(a.trajectories[i].actions == b.trajectories[i].actions);
    }
  }
}

TEST_CASE("demo generation") {
  MazeLayout L = MazeLayout::default_layout();
  EnvConfig env;

  SUBCASE("ten demos all end within goal radius, final cell is the goal cell") {
    auto set = generate_demos(L, Region::left, 10, env, 11);
    CHECK(set.demos.size() == 10);
    Cell goal = L.region_goal_cell(Region::left);
    for (const auto& d : set.demos) {
      auto last = d.state(d.length() - 1);
      CHECK(std::hypot(last[0] - set.goal.x, last[1] - set.goal.y) < set.goal.radius);
      CHECK(L.cell_at(last[0], last[1]) == goal);
    }
  }

  SUBCASE("single demo (one-shot mode)") {
    auto set = generate_demos(L, Region::right, 1, env, 12);
    CHECK(set.demos.size() == 1);
    CHECK(set.goal.region == "right");
  }
}

TEST_CASE("rollouts survive long corridors with sharp turns") {
  // the point mass cruises at full speed down long corridors and overshoots
  // corners into parallel corridors; per-step replanning must recover where
  // a frozen waypoint list would strand it behind a wall
  MazeLayout big = MazeLayout::parse(
      "###################\n"
      "#.................#\n"
      "#.###.###.###.###.#\n"
      "#.................#\n"
      "#####.#####.#####.#\n"
      "#.................#\n"
      "#.#####.#####.###.#\n"
      "#.................#\n"
      "#LLLLL#BBBBB#RRRRR#\n"
      "#####L#####B#R#####\n"
      "#LLLLL#BBBBB#RRRRR#\n"
      "#L#####B#########R#\n"
      "###################\n");
  EnvConfig env;
  for (Region r : {Region::left, Region::right, Region::bottom}) {
    auto set = generate_demos(big, r, 10, env, 77);
    CHECK(set.demos.size() == 10);
    for (const auto& d : set.demos) {
      auto last = d.state(d.length() - 1);
      CHECK(std::hypot(last[0] - set.goal.x, last[1] - set.goal.y) < set.goal.radius);
    }
  }
}

TEST_CASE("fixed start sampling is reproducible and avoids the region") {
  MazeLayout L = MazeLayout::default_layout();
  auto a = sample_start_states(L, Region::bottom, 10, 5);
  auto b = sample_start_states(L, Region::bottom, 10, 5);
  REQUIRE(a.size() == 10);
  std::set<std::pair<double, double>> unique;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
    CHECK(!L.in_region(a[i].x, a[i].y, Region::bottom));
    unique.insert({a[i].x, a[i].y});
  }
  CHECK(unique.size() == 10);
}
