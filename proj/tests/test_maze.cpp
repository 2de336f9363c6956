#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <queue>
#include <set>

#include "novex/errors.hpp"
#include "novex/maze.hpp"

namespace {

using namespace novex::maze;

/// Breadth-first flood fill over open passages, written against the raw wall bits.
int flood_fill(const MazeSpec& spec, int start) {
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  const std::uint8_t bit[4] = {1, 2, 4, 8};
  std::vector<bool> seen(static_cast<std::size_t>(spec.cell_count()), false);
  std::queue<int> open;
  open.push(start);
  seen[static_cast<std::size_t>(start)] = true;
  int count = 0;
  while (!open.empty()) {
    const int id = open.front();
    open.pop();
    ++count;
    const int r = id / spec.cols();
    const int c = id % spec.cols();
    for (int k = 0; k < 4; ++k) {
      if (spec.raw()[static_cast<std::size_t>(id)] & bit[k]) continue;
      const int nr = r + dr[k];
      const int nc = c + dc[k];
      if (nr < 0 || nc < 0 || nr >= spec.rows() || nc >= spec.cols()) continue;
      const int n = nr * spec.cols() + nc;
      if (!seen[static_cast<std::size_t>(n)]) {
        seen[static_cast<std::size_t>(n)] = true;
        open.push(n);
      }
    }
  }
  return count;
}

TEST(FixedMaze, LoadsValidatesAndSpansWorld) {
  const MazeSpec spec = maze_fixed();
  EXPECT_NO_THROW(validate(spec));
  EXPECT_EQ(spec.rows(), 12);
  EXPECT_EQ(spec.cols(), 12);
  EXPECT_DOUBLE_EQ(spec.extent(), 12.0);
  EXPECT_EQ(flood_fill(spec, spec.index({6, 6})), 144);
  EXPECT_EQ(reachable_cells(spec, {6, 6}).size(), 144u);

  const MazeSpec small = maze_fixed_small();
  EXPECT_NO_THROW(validate(small));
  EXPECT_EQ(small.rows(), 10);
  EXPECT_EQ(flood_fill(small, small.index({5, 5})), 100);
}

TEST(PrimMaze, PerfectAndConnectedOverSeeds) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const MazeSpec spec = maze_random_prim(9, 13, seed);
    EXPECT_EQ(passage_count(spec), spec.cell_count() - 1) << "seed " << seed;
    EXPECT_EQ(flood_fill(spec, 0), spec.cell_count()) << "seed " << seed;
    EXPECT_EQ(flood_fill(spec, spec.cell_count() - 1), spec.cell_count()) << "seed " << seed;
    EXPECT_NO_THROW(validate(spec));
  }
}

TEST(PrimMaze, SeedReproducibility) {
  EXPECT_EQ(maze_random_prim(12, 12, 5), maze_random_prim(12, 12, 5));
  EXPECT_NE(maze_random_prim(12, 12, 5).raw(), maze_random_prim(12, 12, 6).raw());
}

TEST(PrimMaze, TwoByTwoHasThreePassages) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_EQ(passage_count(maze_random_prim(2, 2, seed)), 3);
  }
  EXPECT_THROW(maze_random_prim(1, 5, 0), novex::ConfigError);
}

TEST(MazeFormat, RoundTripAndErrors) {
  const MazeSpec spec = maze_random_prim(7, 5, 3);
  EXPECT_EQ(parse_maze(format_maze(spec)), spec);
  const auto path = std::filesystem::temp_directory_path() / "novex_maze.txt";
  save_maze(spec, path);
  EXPECT_EQ(load_maze(path), spec);
  std::filesystem::remove(path);

  EXPECT_THROW(parse_maze("# comment\n9c\n3g\n"), novex::ConfigError);  // bad digit
  EXPECT_THROW(parse_maze("9c\n3\n"), novex::ConfigError);               // ragged
  EXPECT_THROW(parse_maze("9b\nc6\n"), novex::ConfigError);              // one-sided wall
  EXPECT_THROW(parse_maze(""), novex::ConfigError);
}

TEST(Validate, RejectsDisconnectedAndOpenBorder) {
  MazeSpec closed(2, 2, kAllWalls);
  EXPECT_THROW(validate(closed), novex::ConfigError);
  MazeSpec open = open_grid(3, 3);
  EXPECT_NO_THROW(validate(open));
  auto raw_border = format_maze(open);
  raw_border[0] = '8';  // row 0, col 0 loses its north wall
  EXPECT_THROW(validate(parse_maze(raw_border)), novex::ConfigError);
}

TEST(EnvStep, ZeroActionStaysPut) {
  const MazeSpec spec = maze_fixed();
  const auto s0 = initial_state(spec);
  const auto [s1, r] = env_step(spec, s0, {0.0, 0.0}, Dynamics{});
  EXPECT_EQ(s1.position, s0.position);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_FALSE(r.done);
}

TEST(EnvStep, WallBlocksOnlyTheBlockedAxis) {
  // start cell (6, 6) is closed to the north, south and west and open to the east
  const MazeSpec spec = maze_fixed();
  const auto s0 = initial_state(spec);
  EXPECT_EQ(s0.position, (Vec2{1.0, -1.0}));
  const auto [s1, r1] = env_step(spec, s0, {-1.0, 0.0}, Dynamics{});
  EXPECT_EQ(s1.position, (Vec2{0.0, -1.0}));
  const auto [s2, r2] = env_step(spec, s1, {-1.0, 0.0}, Dynamics{});
  EXPECT_EQ(s2.position, (Vec2{0.0, -1.0}));
  // y = -2 already lies in row 7, behind the closed south wall
  const auto [s3, r3] = env_step(spec, s2, {0.5, -1.5}, Dynamics{});
  EXPECT_EQ(s3.position, (Vec2{0.5, -1.0}));
  const auto [s4, r4] = env_step(spec, s3, {0.0, -0.5}, Dynamics{});
  EXPECT_EQ(s4.position, (Vec2{0.5, -1.5}));
}

TEST(EnvStep, ScriptedPathMatchesHandTrace) {
  const MazeSpec spec = maze_fixed();
  auto s = initial_state(spec);
  const std::vector<Vec2> actions{{1, 0},  {1, 0},      {0.5, 1},   {0, 1}, {0, 1},
                                  {-1, 0.25}, {1, -1}, {0.75, 0.5}, {2, 0}, {-1, -1}};
  const std::vector<Vec2> expected{{2.0, -1.0}, {3.0, -1.0}, {3.5, 0.0},  {3.5, 0.0},
                                   {3.5, 0.0},  {2.5, 0.0},  {3.5, -1.0}, {4.25, -0.5},
                                   {5.25, -0.5}, {4.25, -1.5}};
  for (std::size_t i = 0; i < actions.size(); ++i) {
    s = env_step(spec, s, actions[i], Dynamics{}).first;
    EXPECT_EQ(s.position, expected[i]) << "step " << i;
  }
  EXPECT_EQ(cell_of(spec, s.position), (Cell{6, 8}));
}

TEST(EnvStep, EpisodeEndsUnlessContinual) {
  const MazeSpec spec = maze_fixed_small();
  Dynamics episodic;
  episodic.episode_length = 5;
  Dynamics continual = episodic;
  continual.continual = true;
  auto a = initial_state(spec);
  auto b = initial_state(spec);
  for (int i = 0; i < 5; ++i) {
    auto ra = env_step(spec, a, {0.3, 0.3}, episodic);
    auto rb = env_step(spec, b, {0.3, 0.3}, continual);
    a = ra.first;
    b = rb.first;
    EXPECT_EQ(ra.second.done, i == 4);
    EXPECT_FALSE(rb.second.done);
  }
}

// Each single-axis move may cross at most one cell boundary, and only through an open wall.
bool legal_axis_move(const MazeSpec& spec, Cell from, Cell to) {
  if (from == to) return true;
  const int dr = to.row - from.row;
  const int dc = to.col - from.col;
  if (std::abs(dr) + std::abs(dc) != 1) return false;
  const Wall w = dc == 1 ? kEast : dc == -1 ? kWest : dr == 1 ? kSouth : kNorth;
  return !spec.has_wall(from, w);
}

TEST(EnvStep, CollisionFuzz) {
  novex::Rng rng(77);
  const std::vector<MazeSpec> mazes{maze_fixed(), maze_fixed_small(), maze_random_prim(13, 13, 4),
                                    maze_random_prim(24, 24, 1)};
  int steps = 0;
  for (const auto& spec : mazes) {
    auto s = initial_state(spec);
    for (int i = 0; i < 25000; ++i, ++steps) {
      const Vec2 a{novex::uniform(rng, -1.5, 1.5), novex::uniform(rng, -1.5, 1.5)};
      const auto next = env_step(spec, s, a, Dynamics{}).first;
      const Vec2 mid{next.position.x, s.position.y};
      ASSERT_LE(std::abs(next.position.x), spec.extent());
      ASSERT_LE(std::abs(next.position.y), spec.extent());
      ASSERT_TRUE(legal_axis_move(spec, cell_of(spec, s.position), cell_of(spec, mid)));
      ASSERT_TRUE(legal_axis_move(spec, cell_of(spec, mid), cell_of(spec, next.position)));
      s = next;
    }
  }
  EXPECT_EQ(steps, 100000);
}

TEST(EnvStep, SameActionsSameTrajectory) {
  const MazeSpec spec = maze_random_prim(12, 12, 8);
  novex::Rng rng_a(3);
  novex::Rng rng_b(3);
  auto a = initial_state(spec);
  auto b = initial_state(spec);
  for (int i = 0; i < 500; ++i) {
    a = env_step(spec, a, {novex::uniform(rng_a, -1, 1), novex::uniform(rng_a, -1, 1)}, {}).first;
    b = env_step(spec, b, {novex::uniform(rng_b, -1, 1), novex::uniform(rng_b, -1, 1)}, {}).first;
    ASSERT_EQ(a.position, b.position);
  }
}

TEST(Coverage, CountsDistinctReachableCells) {
  const MazeSpec spec = maze_fixed();
  EXPECT_DOUBLE_EQ(coverage(std::span<const Vec2>{}, spec), 1.0 / 144.0);
  std::vector<std::uint8_t> all(144, 1);
  EXPECT_DOUBLE_EQ(coverage(all, spec), 1.0);

  const MazeSpec grid = open_grid(3, 3);
  std::vector<std::uint8_t> visited(9, 0);
  for (const Cell c : {Cell{0, 0}, Cell{0, 1}, Cell{0, 2}, Cell{1, 2}, Cell{2, 2}, Cell{2, 1},
                       Cell{2, 0}, Cell{1, 0}}) {
    visited[static_cast<std::size_t>(grid.index(c))] = 1;
  }
  EXPECT_DOUBLE_EQ(coverage(visited, grid), 8.0 / 9.0);
}

TEST(Coverage, MonotoneWithinARun) {
  MazeEnv env(maze_fixed(), Dynamics{});
  env.reset();
  novex::Rng rng(1);
  double last = env.lifetime_coverage();
  for (int i = 0; i < 2000; ++i) {
    const auto r = env.step({novex::uniform(rng, -1, 1), novex::uniform(rng, -1, 1)});
    if (r.done) env.reset();
    EXPECT_GE(env.lifetime_coverage(), last);
    last = env.lifetime_coverage();
  }
}

TEST(NoisyWrap, ZeroOutsideNoiseInside) {
  const MazeSpec spec = maze_fixed();
  NoisyWrap noise(default_noise_zones(spec), 5);
  const Eigen::Vector2d obs(1.0, -1.0);
  EXPECT_EQ(noise.apply(obs, {1.0, -1.0}).size(), 3);
  EXPECT_EQ(noise.apply(obs, {1.0, -1.0})(2), 0.0);

  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double v = noise.apply(obs, {6.0, 6.0})(2);
    sum += v;
    sq += v * v;
  }
  const double variance = sq / 100.0 - (sum / 100.0) * (sum / 100.0);
  EXPECT_GT(variance, 0.0);

  MazeEnv wrapped(spec, Dynamics{}, NoisyWrap(default_noise_zones(spec), 1));
  MazeEnv plain(spec, Dynamics{});
  EXPECT_EQ(wrapped.observation_dim(), 3);
  EXPECT_EQ(plain.observation_dim(), 2);
  EXPECT_EQ(wrapped.reset().observation.size(), 3);
}

TEST(MazeEnv, ContinualResetKeepsPosition) {
  Dynamics d;
  d.continual = true;
  MazeEnv env(maze_random_prim(24, 24, 2), d);
  env.reset();
  novex::Rng rng(2);
  for (int i = 0; i < 50; ++i) env.step({novex::uniform(rng, -1, 1), novex::uniform(rng, -1, 1)});
  const Vec2 before = env.position();
  env.reset();
  EXPECT_EQ(env.position(), before);
  EXPECT_EQ(env.state().step, 0);
}

}  // namespace
