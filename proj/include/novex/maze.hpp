#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "novex/random.hpp"

namespace novex::maze {

/// Wall bits of one cell, stored as a single hex digit in layout files.
enum Wall : std::uint8_t { kNorth = 1, kEast = 2, kSouth = 4, kWest = 8 };
inline constexpr std::uint8_t kAllWalls = kNorth | kEast | kSouth | kWest;

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

/// Rectangular grid of cells with per-cell wall bitmasks, laid over the square
/// world [-extent, extent]^2. Row 0 is the northern (top, +y) row; column 0 is western.
class MazeSpec {
 public:
  MazeSpec() = default;
  MazeSpec(int rows, int cols, std::uint8_t fill, double extent = 12.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int cell_count() const { return rows_ * cols_; }
  double extent() const { return extent_; }
  double cell_width() const { return 2.0 * extent_ / cols_; }
  double cell_height() const { return 2.0 * extent_ / rows_; }

  int index(Cell c) const { return c.row * cols_ + c.col; }
  Cell cell(int index) const { return {index / cols_, index % cols_}; }
  bool in_grid(Cell c) const { return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_; }

  std::uint8_t walls(Cell c) const { return walls_[static_cast<std::size_t>(index(c))]; }
  bool has_wall(Cell c, Wall w) const { return (walls(c) & w) != 0; }
  /// Sets a wall on both sides of a shared edge.
  void set_wall(Cell c, Wall w, bool present);

  const std::vector<std::uint8_t>& raw() const { return walls_; }
  bool operator==(const MazeSpec&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  double extent_ = 12.0;
  std::vector<std::uint8_t> walls_;
};

Cell neighbour(Cell c, Wall w);
Wall opposite(Wall w);

/// Every interior wall removed, border closed.
MazeSpec open_grid(int rows, int cols);

/// Randomised Prim's algorithm. Perfect maze, reproducible per seed.
MazeSpec maze_random_prim(int rows, int cols, std::uint64_t seed);

/// Bundled 12x12 layout.
MazeSpec maze_fixed();
/// Bundled 10x10 layout used for quick experiments.
MazeSpec maze_fixed_small();

/// Layout text: optional '#' comment lines, then one line per row (north first) with one
/// hex digit per cell (N=1, E=2, S=4, W=8). Throws ConfigError on malformed input.
MazeSpec parse_maze(const std::string& text);
std::string format_maze(const MazeSpec& spec);
MazeSpec load_maze(const std::filesystem::path& path);
void save_maze(const MazeSpec& spec, const std::filesystem::path& path);

/// Throws ConfigError unless walls are symmetric, the border is closed and every cell
/// is reachable from every other.
void validate(const MazeSpec& spec);

/// Number of open edges between adjacent cells.
int passage_count(const MazeSpec& spec);
/// Cells reachable from `start` through open passages (flood fill).
std::vector<int> reachable_cells(const MazeSpec& spec, Cell start);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct Rect {
  double x0, y0, x1, y1;
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

Cell cell_of(const MazeSpec& spec, Vec2 p);
Vec2 cell_center(const MazeSpec& spec, Cell c);
/// Episode start: centre of the middle cell.
Vec2 start_position(const MazeSpec& spec);

struct Dynamics {
  double step_scale = 1.0;   // world units per unit action
  int episode_length = 300;
  bool continual = false;    // no terminal step
};

struct ContinuousMazeState {
  Vec2 position;
  int step = 0;                      // within episode
  std::vector<std::uint8_t> visited; // per cell, this episode
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
};

ContinuousMazeState initial_state(const MazeSpec& spec);

/// Moves by clamp(action, -1, 1) * step_scale, one axis at a time (x then y). A move that
/// would cross a closed wall or the world border leaves that axis unchanged.
std::pair<ContinuousMazeState, StepResult> env_step(const MazeSpec& spec,
                                                    const ContinuousMazeState& state,
                                                    Vec2 action, const Dynamics& dynamics);

/// Distinct visited cells / cells reachable from the start cell.
double coverage(std::span<const Vec2> history, const MazeSpec& spec);
double coverage(const std::vector<std::uint8_t>& visited, const MazeSpec& spec);

/// One 2x2 zone centred in each quadrant at (+-extent/2, +-extent/2).
std::array<Rect, 4> default_noise_zones(const MazeSpec& spec);

/// Appends one element to observations: a fresh standard normal draw inside any zone,
/// exactly 0 outside.
class NoisyWrap {
 public:
  NoisyWrap(std::array<Rect, 4> zones, std::uint64_t seed) : zones_(zones), rng_(seed) {}
  Eigen::VectorXd apply(const Eigen::VectorXd& observation, Vec2 position);
  bool in_zone(Vec2 position) const;
  const std::array<Rect, 4>& zones() const { return zones_; }

 private:
  std::array<Rect, 4> zones_;
  Rng rng_;
};

/// Stateful environment: fixed, per-episode randomised, continual or noisy maze.
class MazeEnv {
 public:
  MazeEnv(MazeSpec spec, Dynamics dynamics, std::optional<NoisyWrap> noise = std::nullopt);

  /// Starts an episode. In continual mode only the first call moves the agent.
  StepResult reset();
  StepResult step(Vec2 action);

  /// Replace the layout before the next reset (per-episode randomised mazes).
  void set_maze(MazeSpec spec);

  const MazeSpec& spec() const { return spec_; }
  const ContinuousMazeState& state() const { return state_; }
  Vec2 position() const { return state_.position; }
  int observation_dim() const { return noise_ ? 3 : 2; }
  /// Cells visited over the environment's lifetime (union over episodes).
  const std::vector<std::uint8_t>& lifetime_visited() const { return lifetime_; }
  double lifetime_coverage() const { return coverage(lifetime_, spec_); }
  double episode_coverage() const { return coverage(state_.visited, spec_); }

 private:
  Eigen::VectorXd observe();
  void mark(Vec2 p);

  MazeSpec spec_;
  Dynamics dynamics_;
  std::optional<NoisyWrap> noise_;
  ContinuousMazeState state_;
  std::vector<std::uint8_t> lifetime_;
  bool started_ = false;
};

}  // namespace novex::maze
