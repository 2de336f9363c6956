#include "novex/maze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "novex/bundled_mazes.hpp"
#include "novex/errors.hpp"

namespace novex::maze {

namespace {

constexpr std::array<Wall, 4> kDirections{kNorth, kEast, kSouth, kWest};

}  // namespace

MazeSpec::MazeSpec(int rows, int cols, std::uint8_t fill, double extent)
    : rows_(rows), cols_(cols), extent_(extent) {
  if (rows < 1 || cols < 1) throw ConfigError("maze dimensions must be positive");
  if (!(extent > 0.0)) throw ConfigError("maze extent must be positive");
  walls_.assign(static_cast<std::size_t>(rows * cols), fill);
}

void MazeSpec::set_wall(Cell c, Wall w, bool present) {
  auto apply = [&](Cell cell, Wall wall) {
    auto& bits = walls_[static_cast<std::size_t>(index(cell))];
    bits = present ? static_cast<std::uint8_t>(bits | wall)
                   : static_cast<std::uint8_t>(bits & ~wall);
  };
  apply(c, w);
  const Cell n = neighbour(c, w);
  if (in_grid(n)) apply(n, opposite(w));
}

Cell neighbour(Cell c, Wall w) {
  switch (w) {
    case kNorth: return {c.row - 1, c.col};
    case kSouth: return {c.row + 1, c.col};
    case kEast: return {c.row, c.col + 1};
    case kWest: return {c.row, c.col - 1};
  }
  return c;
}

Wall opposite(Wall w) {
  switch (w) {
    case kNorth: return kSouth;
    case kSouth: return kNorth;
    case kEast: return kWest;
    case kWest: return kEast;
  }
  return w;
}

MazeSpec open_grid(int rows, int cols) {
  MazeSpec spec(rows, cols, 0);
  for (int r = 0; r < rows; ++r) {
    spec.set_wall({r, 0}, kWest, true);
    spec.set_wall({r, cols - 1}, kEast, true);
  }
  for (int c = 0; c < cols; ++c) {
    spec.set_wall({0, c}, kNorth, true);
    spec.set_wall({rows - 1, c}, kSouth, true);
  }
  return spec;
}

MazeSpec maze_random_prim(int rows, int cols, std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw ConfigError("maze_random_prim: rows and cols must be >= 2");
  MazeSpec spec(rows, cols, kAllWalls);
  Rng rng(seed);
  std::vector<std::uint8_t> in_tree(static_cast<std::size_t>(rows * cols), 0);
  // Frontier of (tree cell, direction) edges leading out of the tree.
  std::vector<std::pair<Cell, Wall>> frontier;
  auto add_cell = [&](Cell c) {
    in_tree[static_cast<std::size_t>(spec.index(c))] = 1;
    for (const Wall w : kDirections) {
      const Cell n = neighbour(c, w);
      if (spec.in_grid(n) && !in_tree[static_cast<std::size_t>(spec.index(n))]) {
        frontier.emplace_back(c, w);
      }
    }
  };
  add_cell(spec.cell(static_cast<int>(uniform_index(rng, static_cast<std::size_t>(rows * cols)))));
  while (!frontier.empty()) {
    const std::size_t pick = uniform_index(rng, frontier.size());
    const auto [from, w] = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    const Cell to = neighbour(from, w);
    if (in_tree[static_cast<std::size_t>(spec.index(to))]) continue;
    spec.set_wall(from, w, false);
    add_cell(to);
  }
  return spec;
}

MazeSpec maze_fixed() { return parse_maze(std::string(bundled::kFixed12x12)); }
MazeSpec maze_fixed_small() { return parse_maze(std::string(bundled::kFixed10x10)); }

MazeSpec parse_maze(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw ConfigError("maze layout: no rows");
  const auto cols = static_cast<int>(rows.front().size());
  MazeSpec spec(static_cast<int>(rows.size()), cols, 0);
  for (int r = 0; r < spec.rows(); ++r) {
    if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != cols) {
      throw ConfigError("maze layout: row " + std::to_string(r) + " has the wrong length");
    }
    for (int c = 0; c < cols; ++c) {
      const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      int v = -1;
      if (ch >= '0' && ch <= '9') v = ch - '0';
      else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
      else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
      if (v < 0) throw ConfigError(std::string("maze layout: bad hex digit '") + ch + "'");
      for (const Wall w : kDirections) {
        if (v & w) spec.set_wall({r, c}, w, true);
      }
    }
  }
  // set_wall mirrors walls, so a one-sided wall in the file surfaces here as asymmetry.
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < cols; ++c) {
      const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      const int v = std::stoi(std::string(1, ch), nullptr, 16);
      if (v != spec.walls({r, c})) {
        throw ConfigError("maze layout: wall at row " + std::to_string(r) + " col " +
                          std::to_string(c) + " is not mirrored by its neighbour");
      }
    }
  }
  return spec;
}

std::string format_maze(const MazeSpec& spec) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < spec.cols(); ++c) out.push_back(kHex[spec.walls({r, c})]);
    out.push_back('\n');
  }
  return out;
}

MazeSpec load_maze(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read maze layout " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_maze(buf.str());
}

void save_maze(const MazeSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# " << spec.rows() << "x" << spec.cols() << " maze; hex wall bits N=1 E=2 S=4 W=8\n"
      << format_maze(spec);
}

void validate(const MazeSpec& spec) {
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < spec.cols(); ++c) {
      const Cell cell{r, c};
      for (const Wall w : kDirections) {
        const Cell n = neighbour(cell, w);
        if (!spec.in_grid(n)) {
          if (!spec.has_wall(cell, w)) throw ConfigError("maze border is open");
        } else if (spec.has_wall(cell, w) != spec.has_wall(n, opposite(w))) {
          throw ConfigError("maze walls are not symmetric");
        }
      }
    }
  }
  if (static_cast<int>(reachable_cells(spec, {0, 0}).size()) != spec.cell_count()) {
    throw ConfigError("maze is not connected");
  }
}

int passage_count(const MazeSpec& spec) {
  int n = 0;
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < spec.cols(); ++c) {
      if (c + 1 < spec.cols() && !spec.has_wall({r, c}, kEast)) ++n;
      if (r + 1 < spec.rows() && !spec.has_wall({r, c}, kSouth)) ++n;
    }
  }
  return n;
}

std::vector<int> reachable_cells(const MazeSpec& spec, Cell start) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(spec.cell_count()), 0);
  std::vector<int> out;
  std::vector<Cell> stack{start};
  seen[static_cast<std::size_t>(spec.index(start))] = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    out.push_back(spec.index(c));
    for (const Wall w : kDirections) {
      const Cell n = neighbour(c, w);
      if (spec.has_wall(c, w) || !spec.in_grid(n)) continue;
      auto& s = seen[static_cast<std::size_t>(spec.index(n))];
      if (!s) {
        s = 1;
        stack.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Cell cell_of(const MazeSpec& spec, Vec2 p) {
  const int col = static_cast<int>(std::floor((p.x + spec.extent()) / spec.cell_width()));
  const int row = static_cast<int>(std::floor((spec.extent() - p.y) / spec.cell_height()));
  return {std::clamp(row, 0, spec.rows() - 1), std::clamp(col, 0, spec.cols() - 1)};
}

Vec2 cell_center(const MazeSpec& spec, Cell c) {
  return {-spec.extent() + (c.col + 0.5) * spec.cell_width(),
          spec.extent() - (c.row + 0.5) * spec.cell_height()};
}

Vec2 start_position(const MazeSpec& spec) {
  return cell_center(spec, {spec.rows() / 2, spec.cols() / 2});
}

ContinuousMazeState initial_state(const MazeSpec& spec) {
  ContinuousMazeState s;
  s.position = start_position(spec);
  s.visited.assign(static_cast<std::size_t>(spec.cell_count()), 0);
  s.visited[static_cast<std::size_t>(spec.index(cell_of(spec, s.position)))] = 1;
  return s;
}

namespace {

// True when moving from `from` to `to` along one axis crosses no closed wall.
bool passable(const MazeSpec& spec, Vec2 from, Vec2 to) {
  const double e = spec.extent();
  if (to.x < -e || to.x > e || to.y < -e || to.y > e) return false;
  Cell c = cell_of(spec, from);
  const Cell target = cell_of(spec, to);
  while (!(c == target)) {
    Wall w;
    if (target.col > c.col) w = kEast;
    else if (target.col < c.col) w = kWest;
    else if (target.row > c.row) w = kSouth;
    else w = kNorth;
    if (spec.has_wall(c, w)) return false;
    c = neighbour(c, w);
  }
  return true;
}

}  // namespace

std::pair<ContinuousMazeState, StepResult> env_step(const MazeSpec& spec,
                                                    const ContinuousMazeState& state,
                                                    Vec2 action, const Dynamics& dynamics) {
  ContinuousMazeState next = state;
  const double dx = std::clamp(action.x, -1.0, 1.0) * dynamics.step_scale;
  const double dy = std::clamp(action.y, -1.0, 1.0) * dynamics.step_scale;

  const Vec2 moved_x{next.position.x + dx, next.position.y};
  if (passable(spec, next.position, moved_x)) next.position = moved_x;
  const Vec2 moved_y{next.position.x, next.position.y + dy};
  if (passable(spec, next.position, moved_y)) next.position = moved_y;

  next.step = state.step + 1;
  next.visited[static_cast<std::size_t>(spec.index(cell_of(spec, next.position)))] = 1;

  StepResult result;
  result.observation = Eigen::Vector2d(next.position.x, next.position.y);
  result.reward = 0.0;
  result.done = !dynamics.continual && next.step >= dynamics.episode_length;
  return {std::move(next), std::move(result)};
}

double coverage(const std::vector<std::uint8_t>& visited, const MazeSpec& spec) {
  const auto reachable = reachable_cells(spec, cell_of(spec, start_position(spec)));
  std::size_t hit = 0;
  for (const int idx : reachable) hit += visited[static_cast<std::size_t>(idx)] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(reachable.size());
}

double coverage(std::span<const Vec2> history, const MazeSpec& spec) {
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(spec.cell_count()), 0);
  visited[static_cast<std::size_t>(spec.index(cell_of(spec, start_position(spec))))] = 1;
  for (const Vec2 p : history) visited[static_cast<std::size_t>(spec.index(cell_of(spec, p)))] = 1;
  return coverage(visited, spec);
}

std::array<Rect, 4> default_noise_zones(const MazeSpec& spec) {
  const double h = spec.extent() / 2.0;
  std::array<Rect, 4> zones{};
  const std::array<Vec2, 4> centres{{{h, h}, {-h, h}, {-h, -h}, {h, -h}}};
  for (std::size_t i = 0; i < 4; ++i) {
    zones[i] = {centres[i].x - 1.0, centres[i].y - 1.0, centres[i].x + 1.0, centres[i].y + 1.0};
  }
  return zones;
}

bool NoisyWrap::in_zone(Vec2 position) const {
  return std::any_of(zones_.begin(), zones_.end(),
                     [&](const Rect& r) { return r.contains(position); });
}

Eigen::VectorXd NoisyWrap::apply(const Eigen::VectorXd& observation, Vec2 position) {
  Eigen::VectorXd out(observation.size() + 1);
  out.head(observation.size()) = observation;
  out(observation.size()) =
      in_zone(position) ? std::normal_distribution<double>(0.0, 1.0)(rng_) : 0.0;
  return out;
}

MazeEnv::MazeEnv(MazeSpec spec, Dynamics dynamics, std::optional<NoisyWrap> noise)
    : spec_(std::move(spec)), dynamics_(dynamics), noise_(std::move(noise)) {
  lifetime_.assign(static_cast<std::size_t>(spec_.cell_count()), 0);
  state_ = initial_state(spec_);
}

void MazeEnv::set_maze(MazeSpec spec) {
  if (spec.rows() != spec_.rows() || spec.cols() != spec_.cols()) {
    throw ConfigError("MazeEnv::set_maze: grid size must not change");
  }
  spec_ = std::move(spec);
}

void MazeEnv::mark(Vec2 p) { lifetime_[static_cast<std::size_t>(spec_.index(cell_of(spec_, p)))] = 1; }

Eigen::VectorXd MazeEnv::observe() {
  Eigen::VectorXd obs = Eigen::Vector2d(state_.position.x, state_.position.y);
  if (noise_) obs = noise_->apply(obs, state_.position);
  return obs;
}

StepResult MazeEnv::reset() {
  if (!dynamics_.continual || !started_) {
    state_ = initial_state(spec_);
  } else {
    state_.step = 0;
    state_.visited.assign(static_cast<std::size_t>(spec_.cell_count()), 0);
    state_.visited[static_cast<std::size_t>(spec_.index(cell_of(spec_, state_.position)))] = 1;
  }
  started_ = true;
  mark(state_.position);
  StepResult r;
  r.observation = observe();
  return r;
}

StepResult MazeEnv::step(Vec2 action) {
  auto [next, result] = env_step(spec_, state_, action, dynamics_);
  state_ = std::move(next);
  mark(state_.position);
  result.observation = observe();
  return result;
}

}  // namespace novex::maze
