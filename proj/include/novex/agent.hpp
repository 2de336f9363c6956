#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "novex/nn.hpp"
#include "novex/random.hpp"
#include "novex/recode.hpp"
#include "novex/replay.hpp"
#include "novex/reservoir.hpp"

namespace novex {

/// Which signals reach the policy: the observation, the internal feedback, or both.
enum class ConditionMode { kObservation, kFeedback, kCombined };

enum class ActionSpace { kDiscrete, kContinuous };

std::string to_string(ConditionMode mode);
ConditionMode parse_condition_mode(const std::string& text);

struct ExplorerConfig {
  double learning_rate = 3e-4;
  double gamma = 0.9;
  double beta_d = 5.0;  // online density bonus scale
  double beta_g = 5.0;  // offline goal bonus scale
  int train_steps_per_epoch = 100;
  int target_updates_per_epoch = 10;
  double polyak = 1.0;
  int epochs_per_episode = 1;
  std::size_t replay_steps = 20000;
  std::size_t goal_replay_steps = 20000;
  std::size_t minibatch = 200;
  int hidden_size = 256;
  int hidden_layers = 3;
  int feedback_esn_size = 180;
  int obs_esn_per_dim = 60;
  int obs_esn_max = 0;  // 0 = no cap on obs_esn_per_dim * obs_dim
  double obs_input_scale = 1.0;  // observation multiplier before it enters a reservoir
  double spectral_radius = 1.15;
  double esn_connectivity = 0.1;
  std::size_t density_k = 15;
  std::size_t density_bins = 8;
  double epsilon_initial = 1.0;
  double epsilon_min = 0.1;
  double epsilon_decay = 0.9;
  std::uint64_t epsilon_initial_steps = 100;
  bool use_recode = true;
  RecodeParams recode;
  /// Scalars on the density bonus of each episode's most novel step, by replay source.
  double main_goal_multiplier = 1.0;
  double goal_buffer_goal_multiplier = 1.0;
  /// Training targets read the raw negative densities instead of the normalized ones.
  bool raw_density_targets = false;
  /// Weight of the mean squared actor pre-activation added to the actor loss; keeps the
  /// tanh output out of saturation.
  double actor_preactivation_l2 = 1.0;
  double rmsprop_smoothing = 0.99;
  double rmsprop_epsilon = 1e-8;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  int obs_esn_size(int obs_dim) const;
};

/// [previous action, previous reward, d_norm, one-hot density bin].
Eigen::VectorXd build_feedback(const Eigen::VectorXd& prev_action, double prev_reward,
                               double d_norm, std::size_t n_bins);

/// epsilon_initial for the first epsilon_initial_steps environment steps, then
/// max(epsilon_min, epsilon_initial * epsilon_decay^episodes_completed).
double epsilon_at(std::uint64_t step, std::uint64_t episodes_completed, const ExplorerConfig& cfg);

/// r + beta_d d + beta_g g + gamma q_next_max; the bootstrap is dropped at terminal steps.
/// Throws DivergenceError on non-finite input.
double td_target(double r, double d, double g, double q_next_max, const ExplorerConfig& cfg,
                 bool terminal = false);

/// (feedback critic target, observation critic target):
/// (r + beta_d d + gamma qF_next, r + beta_g g + gamma qX_next).
std::pair<double, double> ddpg_targets(double r, double d_norm, double g_norm, double qF_next,
                                       double qX_next, const ExplorerConfig& cfg,
                                       bool terminal = false);

inline void target_update(nn::DenseNet& target, const nn::DenseNet& online, double polyak) {
  nn::polyak_update(target, online, polyak);
}

struct Action {
  int id = -1;               // discrete id, -1 for continuous actions
  Eigen::VectorXd encoding;  // one-hot (discrete) or the raw vector (continuous)
};

struct TrainStats {
  double mean_loss = 0.0;
  std::size_t updates = 0;
};

/// Transitions gathered from replayed episodes, one column per transition.
struct TransitionBatch {
  std::vector<Eigen::MatrixXd> states;       // per reservoir, at step t
  std::vector<Eigen::MatrixXd> next_states;  // per reservoir, at step t + 1
  Eigen::MatrixXd actions;                   // action encodings
  std::vector<int> action_ids;
  Eigen::VectorXd rewards;      // outcome at t + 1
  Eigen::VectorXd densities;    // normalized, goal multiplier applied
  Eigen::VectorXd goals;        // normalized, goal multiplier applied
  std::vector<std::uint8_t> terminal;

  Eigen::Index size() const { return rewards.size(); }
};

/// Reservoir-based explorer. Owns the fixed reservoirs, their running states, and the
/// trained heads.
class Explorer {
 public:
  virtual ~Explorer() = default;

  ActionSpace action_space() const { return space_; }
  ConditionMode mode() const { return mode_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  int feedback_dim() const;
  const ExplorerConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

  /// Hidden-state matrices (size x (T+1)) of each reservoir over a stored episode, replayed
  /// from its initial states.
  std::vector<Eigen::MatrixXd> replay_states(const EpisodeRecord& episode) const;

  /// Hidden states of every reservoir, in a fixed stream order.
  std::vector<Eigen::VectorXd> reservoir_states() const;
  void reset_reservoirs();
  const std::vector<EsnParams>& reservoirs() const { return esn_; }

  /// Advances every reservoir by one step, then acts epsilon-greedily.
  Action act(const Eigen::VectorXd& obs, const Eigen::VectorXd& feedback, double epsilon,
             Rng& rng);
  /// Greedy output of the last act() call: Q values or the actor's action.
  const Eigen::VectorXd& last_output() const { return last_output_; }
  Action random_action(Rng& rng) const;
  Action action_from_id(int id) const;

  /// Greedy output for given reservoir states, without advancing anything.
  Eigen::VectorXd output_for(const std::vector<Eigen::VectorXd>& states) const {
    return greedy(states);
  }
  /// Named trained networks (online and target).
  virtual std::vector<std::pair<std::string, const nn::DenseNet*>> nets() const = 0;

  /// One training epoch over the replay store; no-op on an empty store.
  virtual TrainStats train_epoch(const ReplayStore& store, Rng& rng) = 0;

  /// Writes the weight files plus manifest.txt into `dir`.
  void save(const std::filesystem::path& dir, const std::string& config_hash) const;

 protected:
  Explorer(ActionSpace space, ConditionMode mode, int obs_dim, int action_dim,
           const ExplorerConfig& cfg, std::uint64_t seed);

  using StateCache = std::deque<std::pair<const EpisodeRecord*, std::vector<Eigen::MatrixXd>>>;

  /// Reservoir inputs for one step, one vector per reservoir.
  virtual std::vector<Eigen::VectorXd> stream_inputs(const Eigen::VectorXd& obs,
                                                     const Eigen::VectorXd& feedback) const = 0;
  virtual Eigen::VectorXd greedy(const std::vector<Eigen::VectorXd>& states) const = 0;
  virtual std::vector<std::pair<std::string, nn::DenseNet*>> mutable_nets() = 0;
  virtual void sync_targets() = 0;
  virtual void reset_optimizers() = 0;

  /// Draws minibatch `index` of an epoch and subsamples it to the minibatch size.
  TransitionBatch sample_batch(const ReplayStore& store, std::size_t index, Rng& rng,
                               StateCache& cache) const;
  void build_reservoirs(const std::vector<Eigen::Index>& input_dims,
                        const std::vector<Eigen::Index>& sizes);
  std::string kind_;

  ActionSpace space_;
  ConditionMode mode_;
  int obs_dim_;
  int action_dim_;
  ExplorerConfig cfg_;
  std::uint64_t seed_;
  std::vector<EsnParams> esn_;
  std::vector<Eigen::VectorXd> hidden_;
  Eigen::VectorXd last_output_;

  friend std::unique_ptr<Explorer> load_explorer(const std::filesystem::path&,
                                                 const ExplorerConfig&);
};

/// Discrete actions: one reservoir fed according to the mode, one Q network.
std::unique_ptr<Explorer> make_dqn_explorer(ConditionMode mode, int obs_dim, int actions,
                                            const ExplorerConfig& cfg, std::uint64_t seed);
/// Continuous actions: feedback and observation reservoirs with one critic each (only the
/// active streams are used) and an actor over the active reservoir states.
std::unique_ptr<Explorer> make_ddpg_explorer(ConditionMode mode, int obs_dim, int action_dim,
                                             const ExplorerConfig& cfg, std::uint64_t seed);

/// Restores a saved explorer. Reservoirs are regenerated from the recorded seed and sizes;
/// training hyperparameters come from `cfg`.
std::unique_ptr<Explorer> load_explorer(const std::filesystem::path& dir,
                                        const ExplorerConfig& cfg);

}  // namespace novex
