#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "novex/agent.hpp"
#include "novex/config.hpp"

namespace novex {

/// One row of episodes.csv.
struct EpisodeRow {
  std::uint64_t episode = 0;
  std::uint64_t total_steps = 0;
  double coverage = 0.0;          // lifetime coverage
  double episode_coverage = 0.0;  // coverage within this episode alone
  double goal_density = 0.0;      // largest online negative density of the episode
  double record = 0.0;            // goal-buffer record after the episode
  double epsilon = 0.0;
  double mean_loss = 0.0;
  std::uint64_t replay_steps = 0;
  std::uint64_t goal_episodes = 0;
  std::uint64_t centroids = 0;
};

struct RunOptions {
  std::filesystem::path out_dir;             // empty: write nothing
  std::unique_ptr<Explorer> explorer;        // preset model (deploy); built from config otherwise
  bool train = true;
  std::optional<double> fixed_epsilon;       // overrides the schedule
  bool save_model = true;
};

struct RunResult {
  std::vector<EpisodeRow> episodes;
  double score = 0.0;  // see final_score
  bool failed = false;
  std::string failure;
  std::unique_ptr<Explorer> explorer;
  std::vector<double> lowest_density_point;
};

/// Rollout / training alternation until the step budget is spent.
RunResult run_experiment(const RunConfig& cfg, RunOptions options = {});

/// Lifetime coverage at the end of the run; for per-episode randomised mazes the mean
/// episode coverage over the final tenth of the episodes (at least one).
double final_score(const std::vector<EpisodeRow>& rows, TaskKind task);

std::string episode_csv_header();
std::string episode_csv_row(const EpisodeRow& row);
std::vector<EpisodeRow> read_episode_log(const std::filesystem::path& path);

/// Median / min / max of a quantity across runs at fixed step checkpoints.
struct CurvePoint {
  std::uint64_t step = 0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Coverage at step s is the last logged lifetime coverage with total_steps <= s
/// (0 before the first row).
std::vector<CurvePoint> coverage_curve(const std::vector<std::vector<EpisodeRow>>& runs,
                                       std::uint64_t interval, std::uint64_t total_steps);

struct ConditionSummary {
  std::string label;
  std::size_t runs = 0;
  double top = 0.0;
  double bottom = 0.0;
  double bottom_excluding = 0.0;  // lowest score at or above the threshold (bottom if none)
  double median = 0.0;
  std::size_t pathological = 0;   // runs below the threshold
};

ConditionSummary summarize_scores(const std::string& label, const std::vector<double>& scores,
                                  double threshold = 0.15);
double median(std::vector<double> values);

/// Runs seeds [first, last] of `base` on up to `workers` threads into out_dir/seed_<n>,
/// then writes out_dir/scores.csv and out_dir/summary.csv. Returns scores in seed order.
std::vector<double> run_sweep(const RunConfig& base, std::uint64_t first, std::uint64_t last,
                              int workers, const std::filesystem::path& out_dir);

struct DeployScores {
  std::vector<double> pretrained;
  std::vector<double> untrained;
};

/// Frozen-weight runs of a saved model and of a fresh seed-matched model on the
/// configured maze, both with epsilon fixed at epsilon_min.
DeployScores run_deploy(const std::filesystem::path& model_dir, const RunConfig& base,
                        std::uint64_t first, std::uint64_t last, int workers,
                        const std::filesystem::path& out_dir);

/// Reads each directory's runs (subdirectories holding episodes.csv, or the directory
/// itself) and tabulates one summary per directory.
std::vector<ConditionSummary> summarize_runs(const std::vector<std::filesystem::path>& dirs,
                                             double threshold = 0.15);
std::string format_summary_table(const std::vector<ConditionSummary>& rows);

/// Writes the task's layout: a maze text file, or graph transition triples.
void export_task_maze(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace novex
