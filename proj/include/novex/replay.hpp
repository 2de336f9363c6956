#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "novex/random.hpp"

namespace novex {

/// One episode (or continual segment) of experience.
///
/// Per-index arrays have length steps() + 1: index t < steps() is the observation the
/// agent acted on at step t, and index steps() is the observation the last action led to.
/// Transition t therefore reads its outcome (reward, densities) at index t + 1.
struct EpisodeRecord {
  std::size_t episode_index = 0;
  Eigen::MatrixXd observations;     // obs_dim x (T + 1)
  Eigen::MatrixXd actions;          // action encoding, action_dim x T
  std::vector<int> action_ids;      // discrete action ids (empty for continuous actions)
  Eigen::VectorXd prev_action;      // action encoding preceding step 0
  std::vector<double> rewards;      // extrinsic reward received with observation t
  std::vector<double> densities;    // online negative density d_t
  std::vector<double> densities_norm;
  std::vector<double> goals;        // offline negative density, normalized; filled later
  std::vector<Eigen::VectorXd> initial_reservoirs;  // hidden states before step 0
  bool terminal = false;            // last transition ends the episode (no bootstrap)

  /// Index of the most novel observation (largest negative density, i.e. the lowest
  /// memory density) and its value.
  std::size_t goal_step = 0;
  double goal_density = 0.0;

  std::size_t steps() const { return static_cast<std::size_t>(actions.cols()); }
  /// Recomputes goal_step / goal_density from `densities`.
  void update_goal();
  /// Throws ConfigError unless the arrays are mutually consistent.
  void validate() const;
};

enum class ReplaySource { kGoalBuffer, kMainBuffer };

struct ReplayDraw {
  std::shared_ptr<const EpisodeRecord> episode;
  ReplaySource source = ReplaySource::kMainBuffer;
};

/// Main FIFO replay plus the record-breaking goal buffer, both bounded in steps.
class ReplayStore {
 public:
  ReplayStore(std::size_t main_capacity_steps, std::size_t goal_capacity_steps)
      : main_capacity_(main_capacity_steps), goal_capacity_(goal_capacity_steps) {}

  /// Appends to the main buffer (evicting oldest whole episodes) and, when the
  /// episode's goal density beats every earlier one, to the goal buffer as well.
  /// Returns true when the episode entered the goal buffer.
  bool finalize_episode(std::shared_ptr<EpisodeRecord> episode);

  /// Minibatch index 0 draws from the goal buffer (main when empty), index 1 is the most
  /// recent episode, later indices are uniform over the main buffer. Further draws from
  /// the same source are added until `minibatch_steps` transitions are covered.
  std::vector<ReplayDraw> sample_schedule(std::size_t minibatch_index,
                                          std::size_t minibatch_steps, Rng& rng) const;

  /// Sets every stored observation's offline goal value via `goal_of(observation)`.
  void attach_global_goals(
      const std::function<double(std::span<const double>)>& goal_of);

  bool empty() const { return main_.empty(); }
  std::size_t main_steps() const { return main_steps_; }
  std::size_t goal_steps() const { return goal_steps_; }
  const std::deque<std::shared_ptr<EpisodeRecord>>& main() const { return main_; }
  const std::deque<std::shared_ptr<EpisodeRecord>>& goal() const { return goal_; }
  std::optional<double> record() const { return record_; }

 private:
  std::size_t main_capacity_;
  std::size_t goal_capacity_;
  std::deque<std::shared_ptr<EpisodeRecord>> main_;
  std::deque<std::shared_ptr<EpisodeRecord>> goal_;
  std::size_t main_steps_ = 0;
  std::size_t goal_steps_ = 0;
  std::optional<double> record_;
};

}  // namespace novex
