#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "novex/points.hpp"

namespace novex::graph {

/// Undirected spanning tree over a rows x cols grid; cells are numbered row-major.
struct SpanningTree {
  int rows = 0;
  int cols = 0;
  std::vector<std::pair<int, int>> edges;  // (lower id, higher id), sorted

  int cell_count() const { return rows * cols; }
};

/// Wilson's algorithm (loop-erased random walks). Uniform over spanning trees,
/// reproducible per seed.
SpanningTree wilson_maze(int rows, int cols, std::uint64_t seed);

/// Actions: 0 = north (row - 1), 1 = east, 2 = south, 3 = west.
inline constexpr int kActionCount = 4;

/// Discrete maze as a transition table with a fixed observation per state.
struct GraphMaze {
  int rows = 0;
  int cols = 0;
  std::vector<std::array<int, kActionCount>> transitions;  // blocked moves self-loop
  PointSet embedding;                                       // one row per state
  int start_state = 0;

  int state_count() const { return static_cast<int>(transitions.size()); }
  int observation_dim() const { return static_cast<int>(embedding.dim()); }
  Eigen::VectorXd observe(int state) const;
};

/// `count` i.i.d. standard normal vectors, rescaled so the mean nearest-neighbour
/// distance equals 1.
PointSet embed_states(int count, int dim, std::uint64_t seed);

/// Transition table of `tree` with a random embedding; start state is the middle cell.
GraphMaze make_graph_maze(const SpanningTree& tree, int dim, std::uint64_t embed_seed);

struct GraphStep {
  int next_state = 0;
  Eigen::VectorXd observation;
  bool done = false;
};

/// Table lookup. Throws ConfigError for an unknown state or action.
GraphStep graph_step(const GraphMaze& maze, int state, int action);

/// Text export: header comment, then one "state action next" triple per line.
void export_transitions(const GraphMaze& maze, const std::filesystem::path& path);

}  // namespace novex::graph
