#include "fist/maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "fist/errors.hpp"

namespace fist::maze {

namespace {

// Keeps clamped positions strictly inside the free cell even after the
// float32 downcast used by dataset storage.
constexpr double kWallMargin = 1e-4;

char region_char(Region r) {
  switch (r) {
    case Region::left: return 'L';
    case Region::right: return 'R';
    case Region::bottom: return 'B';
    default: return '.';
  }
}

}  // namespace

Region region_from_string(const std::string& s) {
  if (s == "left") return Region::left;
  if (s == "right") return Region::right;
  if (s == "bottom") return Region::bottom;
  if (s == "none" || s.empty()) return Region::none;
  throw ConfigError("unknown region '" + s + "' (expected left|right|bottom|none)");
}

std::string to_string(Region r) {
  switch (r) {
    case Region::left: return "left";
    case Region::right: return "right";
    case Region::bottom: return "bottom";
    default: return "none";
  }
}

MazeLayout MazeLayout::parse(const std::string& text) {
  MazeLayout out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (out.cols_ == 0) {
      out.cols_ = static_cast<int>(line.size());
    } else if (static_cast<int>(line.size()) != out.cols_) {
      throw ConfigError("layout rows have unequal width");
    }
    for (char c : line) {
      if (c != '#' && c != '.' && c != 'L' && c != 'R' && c != 'B') {
        throw ConfigError(std::string("layout has invalid character '") + c + "'");
      }
      out.grid_.push_back(c);
    }
    out.rows_ += 1;
  }
  if (out.rows_ < 3 || out.cols_ < 3) throw ConfigError("layout too small");
  for (int c = 0; c < out.cols_; ++c) {
    if (!out.wall(0, c) || !out.wall(out.rows_ - 1, c)) throw ConfigError("layout border must be walls");
  }
  for (int r = 0; r < out.rows_; ++r) {
    if (!out.wall(r, 0) || !out.wall(r, out.cols_ - 1)) throw ConfigError("layout border must be walls");
  }
  if (!out.connected()) throw ConfigError("layout free cells are not connected");
  return out;
}

MazeLayout MazeLayout::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw MissingArtifactError("missing layout file: " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const std::string& MazeLayout::default_text() {
  // 8x11 interior; the three blockable arms are snake-shaped compartments
  // along the bottom so that reaching a goal inside one takes several turns
  // through cells the blocked corpus never contains.
  static const std::string text =
      "#############\n"
      "#...........#\n"
      "#.###.###.#.#\n"
      "#...........#\n"
      "#.###.#####.#\n"
      "#LLL#BB##RRR#\n"
      "###L##B##R###\n"
      "#LLL##BB#RRR#\n"
      "#L#####B###R#\n"
      "#############\n";
  return text;
}

MazeLayout MazeLayout::default_layout() { return parse(default_text()); }

bool MazeLayout::wall_at(double x, double y) const {
  return wall(static_cast<int>(std::floor(y)), static_cast<int>(std::floor(x)));
}

Region MazeLayout::region_tag(int r, int c) const {
  if (!in_bounds(r, c)) return Region::none;
  switch (grid_[index(r, c)]) {
    case 'L': return Region::left;
    case 'R': return Region::right;
    case 'B': return Region::bottom;
    default: return Region::none;
  }
}

bool MazeLayout::in_region(double x, double y, Region r) const {
  if (r == Region::none) return false;
  return region_tag(static_cast<int>(std::floor(y)), static_cast<int>(std::floor(x))) == r;
}

MazeLayout MazeLayout::blocked(Region r) const {
  MazeLayout out = *this;
  if (r == Region::none) return out;
  const char tag = region_char(r);
  for (auto& c : out.grid_) {
    if (c == tag) c = '#';
  }
  return out;
}

std::vector<Cell> MazeLayout::free_cells() const {
  std::vector<Cell> out;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      if (!wall(r, c)) out.push_back({r, c});
  return out;
}

std::vector<Cell> MazeLayout::free_cells_excluding(Region reg) const {
  std::vector<Cell> out;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      if (!wall(r, c) && region_tag(r, c) != reg) out.push_back({r, c});
  return out;
}

std::vector<Cell> MazeLayout::region_cells(Region reg) const {
  std::vector<Cell> out;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      if (region_tag(r, c) == reg) out.push_back({r, c});
  return out;
}

Cell MazeLayout::region_goal_cell(Region reg) const {
  const auto targets = region_cells(reg);
  if (targets.empty()) throw ConfigError("layout has no cells for region " + to_string(reg));
  // multi-source BFS from all non-region free cells
  std::vector<int> dist(grid_.size(), -1);
  std::deque<Cell> queue;
  for (const Cell& c : free_cells_excluding(reg)) {
    dist[index(c.row, c.col)] = 0;
    queue.push_back(c);
  }
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    const int d = dist[index(c.row, c.col)];
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      Cell n{c.row + dr[k], c.col + dc[k]};
      if (wall(n.row, n.col)) continue;
      if (dist[index(n.row, n.col)] >= 0) continue;
      dist[index(n.row, n.col)] = d + 1;
      queue.push_back(n);
    }
  }
  Cell best = targets.front();
  int best_d = -1;
  for (const Cell& c : targets) {
    const int d = dist[index(c.row, c.col)];
    if (d > best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best_d < 0) throw PlanningError("region " + to_string(reg) + " is unreachable");
  return best;
}

bool MazeLayout::connected() const {
  const auto cells = free_cells();
  if (cells.empty()) return false;
  std::vector<char> seen(grid_.size(), 0);
  std::deque<Cell> queue{cells.front()};
  seen[index(cells.front().row, cells.front().col)] = 1;
  std::size_t count = 1;
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      Cell n{c.row + dr[k], c.col + dc[k]};
      if (wall(n.row, n.col) || seen[index(n.row, n.col)]) continue;
      seen[index(n.row, n.col)] = 1;
      count += 1;
      queue.push_back(n);
    }
  }
  return count == cells.size();
}

Cell MazeLayout::cell_at(double x, double y) const {
  return {static_cast<int>(std::floor(y)), static_cast<int>(std::floor(x))};
}

std::string MazeLayout::text() const {
  std::string out;
  for (int r = 0; r < rows_; ++r) {
    out.append(grid_.begin() + index(r, 0), grid_.begin() + index(r, 0) + cols_);
    out.push_back('\n');
  }
  return out;
}

MazeState step(const MazeState& s, const MazeAction& a, const MazeLayout& layout,
               const EnvConfig& cfg) {
  const double ax = std::clamp(a.ax, -1.0, 1.0);
  const double ay = std::clamp(a.ay, -1.0, 1.0);
  double vx = s.vx + ax * cfg.dt;
  double vy = s.vy + ay * cfg.dt;
  const double speed = std::hypot(vx, vy);
  if (speed > cfg.v_max) {
    vx *= cfg.v_max / speed;
    vy *= cfg.v_max / speed;
  }

  double nx = s.x + vx * cfg.dt;
  double ny = s.y;
  if (layout.wall_at(nx, s.y)) {
    if (nx > s.x) {
      nx = std::floor(nx) - kWallMargin;
    } else {
      nx = std::floor(nx) + 1.0 + kWallMargin;
    }
    vx = 0.0;
  }
  ny = s.y + vy * cfg.dt;
  if (layout.wall_at(nx, ny)) {
    if (ny > s.y) {
      ny = std::floor(ny) - kWallMargin;
    } else {
      ny = std::floor(ny) + 1.0 + kWallMargin;
    }
    vy = 0.0;
  }
  return MazeState{nx, ny, vx, vy};
}

std::vector<Cell> plan_waypoints(const MazeLayout& layout, Cell start, Cell goal) {
  if (!layout.free_cell(start) || !layout.free_cell(goal)) {
    throw PlanningError("plan_waypoints: start or goal is not a free cell");
  }
  if (start == goal) return {start};
  std::vector<int> parent(static_cast<std::size_t>(layout.rows()) * layout.cols(), -1);
  auto idx = [&](Cell c) { return static_cast<std::size_t>(c.row) * layout.cols() + c.col; };
  std::deque<Cell> queue{start};
  parent[idx(start)] = static_cast<int>(idx(start));
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    if (c == goal) break;
    // fixed neighbor order: up, down, left, right
    const Cell neighbors[] = {{c.row - 1, c.col}, {c.row + 1, c.col},
                              {c.row, c.col - 1}, {c.row, c.col + 1}};
    for (const Cell& n : neighbors) {
      if (layout.wall(n.row, n.col) || parent[idx(n)] >= 0) continue;
      parent[idx(n)] = static_cast<int>(idx(c));
      queue.push_back(n);
    }
  }
  if (parent[idx(goal)] < 0) {
    throw PlanningError("plan_waypoints: goal (" + std::to_string(goal.row) + "," +
                        std::to_string(goal.col) + ") unreachable");
  }
  std::vector<Cell> path;
  Cell c = goal;
  while (!(c == start)) {
    path.push_back(c);
    const int p = parent[idx(c)];
    c = Cell{p / layout.cols(), p % layout.cols()};
  }
  path.push_back(start);
  std::reverse(path.begin(), path.end());
  return path;
}

MazeAction waypoint_policy(const MazeState& s, const std::vector<Cell>& path, std::size_t& index,
                           const EnvConfig& cfg) {
  if (path.empty()) throw ConfigError("waypoint_policy: empty path");
  if (index >= path.size()) index = path.size() - 1;
  auto center_x = [](const Cell& c) { return c.col + 0.5; };
  auto center_y = [](const Cell& c) { return c.row + 0.5; };
  while (index + 1 < path.size() &&
         std::hypot(center_x(path[index]) - s.x, center_y(path[index]) - s.y) <
             cfg.waypoint_radius) {
    index += 1;
  }
  const double wx = center_x(path[index]);
  const double wy = center_y(path[index]);
  MazeAction a;
  a.ax = std::clamp(cfg.kp * (wx - s.x) - cfg.kd * s.vx, -1.0, 1.0);
  a.ay = std::clamp(cfg.kp * (wy - s.y) - cfg.kd * s.vy, -1.0, 1.0);
  return a;
}

double goal_distance(const MazeState& s, double gx, double gy) {
  return std::hypot(s.x - gx, s.y - gy);
}

MazeState state_at_cell(Cell cell, Rng* rng, double jitter) {
  MazeState s;
  s.x = cell.col + 0.5;
  s.y = cell.row + 0.5;
  if (rng && jitter > 0.0) {
    s.x += rng->uniform(-jitter, jitter);
    s.y += rng->uniform(-jitter, jitter);
  }
  return s;
}

}  // namespace fist::maze
