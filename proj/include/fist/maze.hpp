#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fist/rng.hpp"

namespace fist::maze {

// Blockable arm of the maze. Blocking turns the tagged cells into walls, so
// generated data can never enter them.
enum class Region { none, left, right, bottom };

Region region_from_string(const std::string& s);
std::string to_string(Region r);

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

// Grid world parsed from text: '#' wall, '.' free, 'L'/'R'/'B' free cells
// tagged to a blockable region. One text row per grid row; the border must
// be walls and the free cells one connected component.
//
// World coordinates: x runs along columns, y along rows (top row is y=0..1).
// Cell (r, c) spans x in [c, c+1) and y in [r, r+1); its center is
// (c + 0.5, r + 0.5). Cell size is 1.0 unit.
class MazeLayout {
 public:
  static MazeLayout parse(const std::string& text);
  static MazeLayout load(const std::filesystem::path& file);
  static const std::string& default_text();
  static MazeLayout default_layout();

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }
  bool wall(int r, int c) const { return !in_bounds(r, c) || grid_[index(r, c)] == '#'; }
  bool free_cell(Cell cell) const { return !wall(cell.row, cell.col); }
  bool wall_at(double x, double y) const;
  Region region_tag(int r, int c) const;
  bool in_region(double x, double y, Region r) const;

  // Copy with every cell of `r` turned into a wall.
  MazeLayout blocked(Region r) const;

  std::vector<Cell> free_cells() const;                    // row-major order
  std::vector<Cell> free_cells_excluding(Region r) const;  // free cells not tagged r
  std::vector<Cell> region_cells(Region r) const;

  // Deepest region cell by BFS distance from the non-region free cells;
  // ties resolved in row-major order. Used as the demo goal.
  Cell region_goal_cell(Region r) const;

  bool connected() const;
  Cell cell_at(double x, double y) const;
  std::string text() const;

 private:
  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols_ + c; }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<char> grid_;
};

struct MazeState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

struct MazeAction {
  double ax = 0.0;
  double ay = 0.0;
};

struct EnvConfig {
  double dt = 0.1;
  double v_max = 2.0;
  int max_steps = 2000;
  double goal_radius = 0.5;
  double kp = 10.0;
  double kd = 2.0;
  double waypoint_radius = 0.25;
};

// Semi-implicit Euler point-mass step. Acceleration is clipped to [-1, 1]
// per axis and speed to v_max; wall penetration along an axis zeroes that
// velocity component and clamps the position to the wall face.
MazeState step(const MazeState& s, const MazeAction& a, const MazeLayout& layout,
               const EnvConfig& cfg);

// Shortest 4-connected path by BFS, neighbor order (up, down, left, right).
// Throws PlanningError when the goal is unreachable.
std::vector<Cell> plan_waypoints(const MazeLayout& layout, Cell start, Cell goal);

// PD control toward the current waypoint center; advances the waypoint index
// once the point is within waypoint_radius of it.
MazeAction waypoint_policy(const MazeState& s, const std::vector<Cell>& path, std::size_t& index,
                           const EnvConfig& cfg);

double goal_distance(const MazeState& s, double gx, double gy);

// Cell center with optional uniform jitter, zero velocity.
MazeState state_at_cell(Cell cell, Rng* rng = nullptr, double jitter = 0.0);

}  // namespace fist::maze
