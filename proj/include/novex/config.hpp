#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "novex/agent.hpp"

namespace novex {

enum class TaskKind { kFixed, kFixedSmall, kPrim, kRandom, kContinual, kNoisy, kGraph };

/// Everything needed to reproduce one run.
///
/// File format: one `key = value` per line, `#` starts a comment, blank lines ignored.
/// Unknown keys and repeated keys are errors. See docs/config.md for the key list.
struct RunConfig {
  std::string task = "fixed";      // fixed | fixed-small | prim | random | continual | noisy | graph-N
  std::string mode = "combined";   // ocp | fcp | combined | random-baseline
  std::uint64_t seed = 0;
  std::uint64_t total_steps = 100000;
  int episode_length = 300;
  double step_scale = 1.0;
  int maze_rows = 0;               // 0: task default
  int maze_cols = 0;
  std::int64_t maze_seed = -1;     // -1: derived from seed
  std::string maze_file;           // optional layout override for the fixed task
  bool trace = false;
  bool goals_from_centroids = true;  // offline goals against centroids when RECODE is on
  ExplorerConfig explorer;

  /// The text this configuration was parsed from (empty when built in code).
  std::string source;

  TaskKind task_kind() const;
  int graph_dim() const;                 // observation dim for graph-N tasks
  bool random_baseline() const { return mode == "random-baseline"; }
  ConditionMode condition_mode() const;  // throws for random-baseline
  int rows() const;                      // resolved maze size
  int cols() const;
  std::uint64_t resolved_maze_seed() const;

  /// Throws ConfigError on any invalid field.
  void validate() const;
};

/// Parses configuration text on top of the defaults (or `base`).
RunConfig parse_run_config(const std::string& text, const RunConfig& base = {});
RunConfig load_run_config(const std::filesystem::path& path);
/// Applies one `key=value` override.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
/// Every key with its resolved value, in a fixed order; parse_run_config inverts it.
std::string format_run_config(const RunConfig& cfg);
/// FNV-1a 64 of format_run_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace novex
