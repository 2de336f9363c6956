#include "novex/graph_maze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "novex/errors.hpp"
#include "novex/random.hpp"

namespace novex::graph {

namespace {

// Neighbour of `cell` under `action`, or -1 off the grid.
int grid_neighbour(int rows, int cols, int cell, int action) {
  const int r = cell / cols;
  const int c = cell % cols;
  switch (action) {
    case 0: return r > 0 ? cell - cols : -1;
    case 1: return c + 1 < cols ? cell + 1 : -1;
    case 2: return r + 1 < rows ? cell + cols : -1;
    case 3: return c > 0 ? cell - 1 : -1;
    default: return -1;
  }
}

}  // namespace

SpanningTree wilson_maze(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw ConfigError("wilson_maze: need at least two cells");
  }
  const int n = rows * cols;
  Rng rng(seed);
  std::vector<std::uint8_t> in_tree(static_cast<std::size_t>(n), 0);
  std::vector<int> next(static_cast<std::size_t>(n), -1);
  in_tree[uniform_index(rng, static_cast<std::size_t>(n))] = 1;

  auto random_neighbour = [&](int cell) {
    int options[kActionCount];
    int count = 0;
    for (int a = 0; a < kActionCount; ++a) {
      const int nb = grid_neighbour(rows, cols, cell, a);
      if (nb >= 0) options[count++] = nb;
    }
    return options[uniform_index(rng, static_cast<std::size_t>(count))];
  };

  SpanningTree tree{rows, cols, {}};
  for (int start = 0; start < n; ++start) {
    // Random walk until the tree is hit; overwriting next[] erases loops.
    int u = start;
    while (!in_tree[static_cast<std::size_t>(u)]) {
      next[static_cast<std::size_t>(u)] = random_neighbour(u);
      u = next[static_cast<std::size_t>(u)];
    }
    u = start;
    while (!in_tree[static_cast<std::size_t>(u)]) {
      in_tree[static_cast<std::size_t>(u)] = 1;
      const int v = next[static_cast<std::size_t>(u)];
      tree.edges.emplace_back(std::min(u, v), std::max(u, v));
      u = v;
    }
  }
  std::sort(tree.edges.begin(), tree.edges.end());
  return tree;
}

Eigen::VectorXd GraphMaze::observe(int state) const {
  const auto p = embedding[static_cast<std::size_t>(state)];
  return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

PointSet embed_states(int count, int dim, std::uint64_t seed) {
  if (dim < 2) throw ConfigError("embed_states: dim must be >= 2");
  if (count < 2) throw ConfigError("embed_states: need at least two states");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> raw(static_cast<std::size_t>(count * dim));
  for (auto& v : raw) v = normal(rng);

  auto point = [&](int i) {
    return std::span<const double>(raw.data() + static_cast<std::size_t>(i * dim),
                                   static_cast<std::size_t>(dim));
  };
  double mean_nn = 0.0;
  for (int i = 0; i < count; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < count; ++j) {
      if (j != i) best = std::min(best, squared_distance(point(i), point(j)));
    }
    mean_nn += std::sqrt(best);
  }
  mean_nn /= count;
  if (!(mean_nn > 0.0)) throw ConfigError("embed_states: degenerate embedding");
  PointSet out(static_cast<std::size_t>(dim));
  out.reserve(static_cast<std::size_t>(count));
  for (auto& v : raw) v /= mean_nn;
  for (int i = 0; i < count; ++i) out.push_back(point(i));
  return out;
}

GraphMaze make_graph_maze(const SpanningTree& tree, int dim, std::uint64_t embed_seed) {
  GraphMaze maze;
  maze.rows = tree.rows;
  maze.cols = tree.cols;
  const int n = tree.cell_count();
  maze.transitions.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) maze.transitions[static_cast<std::size_t>(s)].fill(s);
  for (const auto& [a, b] : tree.edges) {
    for (int act = 0; act < kActionCount; ++act) {
      if (grid_neighbour(tree.rows, tree.cols, a, act) == b) {
        maze.transitions[static_cast<std::size_t>(a)][static_cast<std::size_t>(act)] = b;
      }
      if (grid_neighbour(tree.rows, tree.cols, b, act) == a) {
        maze.transitions[static_cast<std::size_t>(b)][static_cast<std::size_t>(act)] = a;
      }
    }
  }
  maze.embedding = embed_states(n, dim, embed_seed);
  maze.start_state = (tree.rows / 2) * tree.cols + tree.cols / 2;
  return maze;
}

GraphStep graph_step(const GraphMaze& maze, int state, int action) {
  if (state < 0 || state >= maze.state_count()) {
    throw ConfigError("graph_step: unknown state " + std::to_string(state));
  }
  if (action < 0 || action >= kActionCount) {
    throw ConfigError("graph_step: unknown action " + std::to_string(action));
  }
  GraphStep out;
  out.next_state =
      maze.transitions[static_cast<std::size_t>(state)][static_cast<std::size_t>(action)];
  out.observation = maze.observe(out.next_state);
  return out;
}

void export_transitions(const GraphMaze& maze, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# graph maze " << maze.rows << "x" << maze.cols << ", start " << maze.start_state
      << "; columns: state action next (0=N 1=E 2=S 3=W)\n";
  for (int s = 0; s < maze.state_count(); ++s) {
    for (int a = 0; a < kActionCount; ++a) {
      out << s << ' ' << a << ' '
          << maze.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] << '\n';
    }
  }
}

}  // namespace novex::graph
