#include "novex/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "novex/density.hpp"
#include "novex/errors.hpp"

namespace novex {

namespace fs = std::filesystem;

std::string to_string(ConditionMode mode) {
  switch (mode) {
    case ConditionMode::kObservation: return "ocp";
    case ConditionMode::kFeedback: return "fcp";
    case ConditionMode::kCombined: return "combined";
  }
  return "?";
}

ConditionMode parse_condition_mode(const std::string& text) {
  if (text == "ocp") return ConditionMode::kObservation;
  if (text == "fcp") return ConditionMode::kFeedback;
  if (text == "combined") return ConditionMode::kCombined;
  throw ConfigError("unknown condition mode '" + text + "'");
}

void ExplorerConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
  };
  need(learning_rate > 0.0, "learning_rate must be positive");
  need(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  need(beta_d >= 0.0 && beta_g >= 0.0, "bonus scales must be non-negative");
  need(train_steps_per_epoch >= 1, "train_steps_per_epoch must be >= 1");
  need(target_updates_per_epoch >= 1, "target_updates_per_epoch must be >= 1");
  need(polyak > 0.0 && polyak <= 1.0, "polyak must lie in (0, 1]");
  need(epochs_per_episode >= 0, "epochs_per_episode must be >= 0");
  need(replay_steps >= 1 && goal_replay_steps >= 1, "buffer sizes must be >= 1");
  need(minibatch >= 1, "minibatch must be >= 1");
  need(hidden_size >= 1 && hidden_layers >= 0, "bad hidden layer shape");
  need(feedback_esn_size >= 1 && obs_esn_per_dim >= 1 && obs_esn_max >= 0, "bad reservoir size");
  need(spectral_radius > 0.0, "spectral_radius must be positive");
  need(esn_connectivity > 0.0 && esn_connectivity <= 1.0, "esn_connectivity must lie in (0, 1]");
  need(density_k >= 1 && density_bins >= 1, "density_k and density_bins must be >= 1");
  need(epsilon_min >= 0.0 && epsilon_min <= epsilon_initial && epsilon_initial <= 1.0,
       "epsilon bounds");
  need(epsilon_decay > 0.0 && epsilon_decay <= 1.0, "epsilon_decay must lie in (0, 1]");
  need(recode.kappa >= 0.0 && recode.capacity >= 1, "recode parameters");
  need(recode.decay > 0.0 && recode.decay <= 1.0, "recode_decay must lie in (0, 1]");
  need(recode.insertion_probability >= 0.0 && recode.insertion_probability <= 1.0,
       "recode_insertion_probability must lie in [0, 1]");
  need(obs_input_scale > 0.0, "obs_input_scale must be positive");
  need(actor_preactivation_l2 >= 0.0, "actor_preactivation_l2 must be non-negative");
  need(rmsprop_smoothing > 0.0 && rmsprop_smoothing < 1.0 && rmsprop_epsilon > 0.0, "rmsprop");
}

int ExplorerConfig::obs_esn_size(int obs_dim) const {
  const int full = obs_esn_per_dim * obs_dim;
  return obs_esn_max > 0 ? std::min(full, obs_esn_max) : full;
}

Eigen::VectorXd build_feedback(const Eigen::VectorXd& prev_action, double prev_reward,
                               double d_norm, std::size_t n_bins) {
  if (!(d_norm >= 0.0 && d_norm <= 1.0)) throw ConfigError("build_feedback: d_norm outside [0, 1]");
  const Eigen::Index a = prev_action.size();
  Eigen::VectorXd f(a + 2 + static_cast<Eigen::Index>(n_bins));
  f.head(a) = prev_action;
  f(a) = prev_reward;
  f(a + 1) = d_norm;
  f.tail(static_cast<Eigen::Index>(n_bins)) = bin_embedding(d_norm, n_bins);
  return f;
}

double epsilon_at(std::uint64_t step, std::uint64_t episodes_completed,
                  const ExplorerConfig& cfg) {
  if (step < cfg.epsilon_initial_steps) return cfg.epsilon_initial;
  const double decayed =
      cfg.epsilon_initial * std::pow(cfg.epsilon_decay, static_cast<double>(episodes_completed));
  return std::max(cfg.epsilon_min, decayed);
}

namespace {

void require_finite(std::initializer_list<double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DivergenceError(std::string(where) + ": non-finite input");
  }
}

}  // namespace

double td_target(double r, double d, double g, double q_next_max, const ExplorerConfig& cfg,
                 bool terminal) {
  require_finite({r, d, g, q_next_max}, "td_target");
  double y = r + cfg.beta_d * d + cfg.beta_g * g;
  if (!terminal) y += cfg.gamma * q_next_max;
  return y;
}

std::pair<double, double> ddpg_targets(double r, double d_norm, double g_norm, double qF_next,
                                       double qX_next, const ExplorerConfig& cfg, bool terminal) {
  require_finite({r, d_norm, g_norm, qF_next, qX_next}, "ddpg_targets");
  double f = r + cfg.beta_d * d_norm;
  double x = r + cfg.beta_g * g_norm;
  if (!terminal) {
    f += cfg.gamma * qF_next;
    x += cfg.gamma * qX_next;
  }
  return {f, x};
}

Explorer::Explorer(ActionSpace space, ConditionMode mode, int obs_dim, int action_dim,
                   const ExplorerConfig& cfg, std::uint64_t seed)
    : space_(space), mode_(mode), obs_dim_(obs_dim), action_dim_(action_dim), cfg_(cfg),
      seed_(seed) {
  cfg_.validate();
  if (obs_dim < 1 || action_dim < 1) throw ConfigError("explorer: bad observation/action size");
}

int Explorer::feedback_dim() const {
  return action_dim_ + 2 + static_cast<int>(cfg_.density_bins);
}

void Explorer::build_reservoirs(const std::vector<Eigen::Index>& input_dims,
                                const std::vector<Eigen::Index>& sizes) {
  esn_.clear();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    esn_.push_back(esn_init(input_dims[i], sizes[i], cfg_.spectral_radius, cfg_.esn_connectivity,
                            derive_seed(seed_, 100 + i)));
  }
  reset_reservoirs();
}

std::vector<Eigen::VectorXd> Explorer::reservoir_states() const { return hidden_; }

void Explorer::reset_reservoirs() {
  hidden_.clear();
  for (const auto& p : esn_) hidden_.push_back(Eigen::VectorXd::Zero(p.size()));
}

Action Explorer::act(const Eigen::VectorXd& obs, const Eigen::VectorXd& feedback, double epsilon,
                     Rng& rng) {
  const auto inputs = stream_inputs(obs, feedback);
  for (std::size_t i = 0; i < esn_.size(); ++i) {
    hidden_[i] = esn_step(esn_[i], EsnState{hidden_[i], 0}, inputs[i]).hidden;
  }
  last_output_ = greedy(hidden_);
  if (bernoulli(rng, epsilon)) return random_action(rng);
  if (space_ == ActionSpace::kDiscrete) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < last_output_.size(); ++i) {
      if (last_output_(i) > last_output_(best)) best = i;
    }
    return action_from_id(static_cast<int>(best));
  }
  return Action{-1, last_output_};
}

Action Explorer::random_action(Rng& rng) const {
  if (space_ == ActionSpace::kDiscrete) {
    return action_from_id(static_cast<int>(uniform_index(rng, static_cast<std::size_t>(action_dim_))));
  }
  Action a{-1, Eigen::VectorXd(action_dim_)};
  for (int i = 0; i < action_dim_; ++i) a.encoding(i) = uniform(rng, -1.0, 1.0);
  return a;
}

Action Explorer::action_from_id(int id) const {
  if (space_ != ActionSpace::kDiscrete || id < 0 || id >= action_dim_) {
    throw ConfigError("action id out of range");
  }
  Action a{id, Eigen::VectorXd::Zero(action_dim_)};
  a.encoding(id) = 1.0;
  return a;
}

std::vector<Eigen::MatrixXd> Explorer::replay_states(const EpisodeRecord& ep) const {
  const auto n = ep.observations.cols();
  if (ep.initial_reservoirs.size() != esn_.size()) {
    throw ConfigError("episode carries the wrong number of reservoir snapshots");
  }
  std::vector<Eigen::MatrixXd> inputs(esn_.size());
  for (std::size_t s = 0; s < esn_.size(); ++s) inputs[s].resize(esn_[s].input_dim(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd prev = i == 0 ? ep.prev_action : Eigen::VectorXd(ep.actions.col(i - 1));
    const auto fb = build_feedback(prev, ep.rewards[static_cast<std::size_t>(i)],
                                   ep.densities_norm[static_cast<std::size_t>(i)], cfg_.density_bins);
    const auto u = stream_inputs(ep.observations.col(i), fb);
    for (std::size_t s = 0; s < esn_.size(); ++s) inputs[s].col(i) = u[s];
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(esn_.size());
  for (std::size_t s = 0; s < esn_.size(); ++s) {
    out.push_back(esn_replay_matrix(esn_[s], ep.initial_reservoirs[s], inputs[s]));
  }
  return out;
}

TransitionBatch Explorer::sample_batch(const ReplayStore& store, std::size_t index, Rng& rng,
                                       StateCache& cache) const {
  constexpr std::size_t kCacheBytes = std::size_t{256} << 20;
  const auto draws = store.sample_schedule(index, cfg_.minibatch, rng);

  struct Slot {
    std::size_t draw;
    Eigen::Index t;
  };
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    for (std::size_t t = 0; t < draws[i].episode->steps(); ++t) {
      slots.push_back({i, static_cast<Eigen::Index>(t)});
    }
  }
  if (slots.size() > cfg_.minibatch) {
    for (std::size_t i = 0; i < cfg_.minibatch; ++i) {
      std::swap(slots[i], slots[i + uniform_index(rng, slots.size() - i)]);
    }
    slots.resize(cfg_.minibatch);
  }

  std::size_t cached_bytes = 0;
  for (const auto& e : cache) {
    for (const auto& m : e.second) cached_bytes += static_cast<std::size_t>(m.size()) * sizeof(double);
  }
  if (cached_bytes > kCacheBytes) cache.clear();

  std::vector<const std::vector<Eigen::MatrixXd>*> states(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const EpisodeRecord* key = draws[i].episode.get();
    auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == key; });
    if (it == cache.end()) {
      cache.emplace_back(key, replay_states(*key));
      it = cache.end() - 1;
    }
    states[i] = &it->second;
  }

  const auto b = static_cast<Eigen::Index>(slots.size());
  TransitionBatch batch;
  for (const auto& p : esn_) {
    batch.states.emplace_back(p.size(), b);
    batch.next_states.emplace_back(p.size(), b);
  }
  batch.actions.resize(action_dim_, b);
  batch.rewards.resize(b);
  batch.densities.resize(b);
  batch.goals.resize(b);
  batch.terminal.resize(static_cast<std::size_t>(b));
  for (Eigen::Index c = 0; c < b; ++c) {
    const auto& slot = slots[static_cast<std::size_t>(c)];
    const auto& draw = draws[slot.draw];
    const EpisodeRecord& ep = *draw.episode;
    const auto next = static_cast<std::size_t>(slot.t + 1);
    for (std::size_t s = 0; s < esn_.size(); ++s) {
      batch.states[s].col(c) = (*states[slot.draw])[s].col(slot.t);
      batch.next_states[s].col(c) = (*states[slot.draw])[s].col(slot.t + 1);
    }
    batch.actions.col(c) = ep.actions.col(slot.t);
    if (!ep.action_ids.empty()) batch.action_ids.push_back(ep.action_ids[static_cast<std::size_t>(slot.t)]);
    double multiplier = 1.0;
    if (next == ep.goal_step) {
      multiplier = draw.source == ReplaySource::kGoalBuffer ? cfg_.goal_buffer_goal_multiplier
                                                            : cfg_.main_goal_multiplier;
    }
    batch.rewards(c) = ep.rewards[next];
    batch.densities(c) =
        multiplier * (cfg_.raw_density_targets ? ep.densities[next] : ep.densities_norm[next]);
    batch.goals(c) = ep.goals.empty() ? 0.0 : multiplier * ep.goals[next];
    batch.terminal[static_cast<std::size_t>(c)] = ep.terminal && next == ep.steps();
  }
  return batch;
}

namespace {

std::vector<Eigen::Index> hidden_shape(const ExplorerConfig& cfg) {
  return std::vector<Eigen::Index>(static_cast<std::size_t>(cfg.hidden_layers), cfg.hidden_size);
}

Eigen::MatrixXd stack_rows(const std::vector<const Eigen::MatrixXd*>& parts) {
  Eigen::Index rows = 0;
  for (const auto* p : parts) rows += p->rows();
  Eigen::MatrixXd out(rows, parts.front()->cols());
  Eigen::Index r = 0;
  for (const auto* p : parts) {
    out.middleRows(r, p->rows()) = *p;
    r += p->rows();
  }
  return out;
}

Eigen::VectorXd stack_vectors(const std::vector<const Eigen::VectorXd*>& parts) {
  Eigen::Index rows = 0;
  for (const auto* p : parts) rows += p->size();
  Eigen::VectorXd out(rows);
  Eigen::Index r = 0;
  for (const auto* p : parts) {
    out.segment(r, p->size()) = *p;
    r += p->size();
  }
  return out;
}

std::size_t sync_interval(const ExplorerConfig& cfg) {
  return static_cast<std::size_t>(
      std::max(1, cfg.train_steps_per_epoch / cfg.target_updates_per_epoch));
}

class DqnExplorer final : public Explorer {
 public:
  DqnExplorer(ConditionMode mode, int obs_dim, int actions, const ExplorerConfig& cfg,
              std::uint64_t seed, std::vector<Eigen::Index> sizes)
      : Explorer(ActionSpace::kDiscrete, mode, obs_dim, actions, cfg, seed) {
    kind_ = "dqn";
    Eigen::Index input = 0;
    if (mode != ConditionMode::kObservation) input += feedback_dim();
    if (mode != ConditionMode::kFeedback) input += obs_dim;
    if (sizes.empty()) {
      Eigen::Index size = 0;
      if (mode != ConditionMode::kObservation) size += cfg.feedback_esn_size;
      if (mode != ConditionMode::kFeedback) size += cfg.obs_esn_size(obs_dim);
      sizes = {size};
    }
    build_reservoirs({input}, sizes);
    Rng rng(derive_seed(seed, 7));
    q_ = nn::DenseNet::mlp(sizes[0], hidden_shape(cfg), actions, nn::Activation::kIdentity, rng);
    q_target_ = q_;
    opt_ = nn::RmsPropState::for_net(q_, cfg.rmsprop_smoothing, cfg.rmsprop_epsilon);
  }

  TrainStats train_epoch(const ReplayStore& store, Rng& rng) override {
    TrainStats stats;
    if (store.empty()) return stats;
    StateCache cache;
    const auto interval = sync_interval(cfg_);
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < static_cast<std::size_t>(cfg_.train_steps_per_epoch); ++s) {
      const auto batch = sample_batch(store, s, rng, cache);
      const auto b = batch.size();
      nn::ForwardCache fc;
      const Eigen::MatrixXd q = nn::forward_batch(q_, batch.states[0], &fc);
      const Eigen::MatrixXd q_next = nn::forward_batch(q_target_, batch.next_states[0]);
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q.rows(), b);
      double loss = 0.0;
      for (Eigen::Index c = 0; c < b; ++c) {
        const double y = td_target(batch.rewards(c), batch.densities(c), batch.goals(c),
                                   q_next.col(c).maxCoeff(), cfg_,
                                   batch.terminal[static_cast<std::size_t>(c)] != 0);
        const auto a = batch.action_ids[static_cast<std::size_t>(c)];
        const double err = q(a, c) - y;
        loss += err * err;
        grad(a, c) = 2.0 * err / static_cast<double>(b);
      }
      loss_sum += loss / static_cast<double>(b);
      nn::rmsprop_step(q_, nn::backward_batch(q_, fc, grad), opt_, cfg_.learning_rate);
      ++stats.updates;
      if ((s + 1) % interval == 0) sync_targets();
    }
    stats.mean_loss = loss_sum / static_cast<double>(stats.updates);
    return stats;
  }

  std::vector<std::pair<std::string, const nn::DenseNet*>> nets() const override {
    return {{"q", &q_}, {"q_target", &q_target_}};
  }

 protected:
  std::vector<Eigen::VectorXd> stream_inputs(const Eigen::VectorXd& obs,
                                             const Eigen::VectorXd& feedback) const override {
    if (obs.size() != obs_dim_) throw ConfigError("observation dimension mismatch");
    const Eigen::VectorXd scaled = cfg_.obs_input_scale * obs;
    switch (mode_) {
      case ConditionMode::kObservation: return {scaled};
      case ConditionMode::kFeedback: return {feedback};
      case ConditionMode::kCombined: return {stack_vectors({&feedback, &scaled})};
    }
    return {};
  }

  Eigen::VectorXd greedy(const std::vector<Eigen::VectorXd>& states) const override {
    return nn::forward(q_, states[0]);
  }

  std::vector<std::pair<std::string, nn::DenseNet*>> mutable_nets() override {
    return {{"q", &q_}, {"q_target", &q_target_}};
  }

  void sync_targets() override { target_update(q_target_, q_, cfg_.polyak); }

  void reset_optimizers() override {
    opt_ = nn::RmsPropState::for_net(q_, cfg_.rmsprop_smoothing, cfg_.rmsprop_epsilon);
  }

 private:
  nn::DenseNet q_;
  nn::DenseNet q_target_;
  nn::RmsPropState opt_;
};

// Stream order: feedback reservoir first (when active), then observation reservoir.
class DdpgExplorer final : public Explorer {
 public:
  DdpgExplorer(ConditionMode mode, int obs_dim, int action_dim, const ExplorerConfig& cfg,
               std::uint64_t seed, std::vector<Eigen::Index> sizes)
      : Explorer(ActionSpace::kContinuous, mode, obs_dim, action_dim, cfg, seed) {
    kind_ = "ddpg";
    has_feedback_ = mode != ConditionMode::kObservation;
    has_obs_ = mode != ConditionMode::kFeedback;
    std::vector<Eigen::Index> inputs;
    std::vector<Eigen::Index> defaults;
    if (has_feedback_) {
      inputs.push_back(feedback_dim());
      defaults.push_back(cfg.feedback_esn_size);
    }
    if (has_obs_) {
      inputs.push_back(obs_dim);
      defaults.push_back(cfg.obs_esn_size(obs_dim));
    }
    if (sizes.empty()) sizes = defaults;
    if (sizes.size() != inputs.size()) throw ConfigError("ddpg: reservoir count mismatch");
    build_reservoirs(inputs, sizes);

    Rng rng(derive_seed(seed, 7));
    Eigen::Index total = 0;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      critics_.push_back(nn::DenseNet::mlp(sizes[s] + action_dim, hidden_shape(cfg), 1,
                                           nn::Activation::kIdentity, rng));
      total += sizes[s];
    }
    critic_targets_ = critics_;
    // The actor net emits pre-activations; tanh is applied here so the pre-activation
    // penalty can be added to the gradient before squashing.
    actor_ = nn::DenseNet::mlp(total, hidden_shape(cfg), action_dim, nn::Activation::kIdentity, rng);
    actor_target_ = actor_;
    for (const auto& c : critics_) {
      critic_opt_.push_back(nn::RmsPropState::for_net(c, cfg.rmsprop_smoothing, cfg.rmsprop_epsilon));
    }
    actor_opt_ = nn::RmsPropState::for_net(actor_, cfg.rmsprop_smoothing, cfg.rmsprop_epsilon);
  }

  TrainStats train_epoch(const ReplayStore& store, Rng& rng) override {
    TrainStats stats;
    if (store.empty()) return stats;
    StateCache cache;
    const auto interval = sync_interval(cfg_);
    const bool split = critics_.size() == 2;
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < static_cast<std::size_t>(cfg_.train_steps_per_epoch); ++s) {
      const auto batch = sample_batch(store, s, rng, cache);
      const auto b = batch.size();
      const double inv_b = 1.0 / static_cast<double>(b);

      std::vector<const Eigen::MatrixXd*> now;
      std::vector<const Eigen::MatrixXd*> next;
      for (std::size_t c = 0; c < critics_.size(); ++c) {
        now.push_back(&batch.states[c]);
        next.push_back(&batch.next_states[c]);
      }
      const Eigen::MatrixXd z_now = stack_rows(now);
      const Eigen::MatrixXd z_next = stack_rows(next);
      const Eigen::MatrixXd a_next = nn::forward_batch(actor_target_, z_next).array().tanh().matrix();

      double loss = 0.0;
      for (std::size_t c = 0; c < critics_.size(); ++c) {
        const Eigen::MatrixXd q_next =
            nn::forward_batch(critic_targets_[c], stack_rows({&batch.next_states[c], &a_next}));
        const bool feedback_stream = has_feedback_ && c == 0;
        Eigen::VectorXd y(b);
        for (Eigen::Index i = 0; i < b; ++i) {
          const bool terminal = batch.terminal[static_cast<std::size_t>(i)] != 0;
          if (split) {
            const auto [yf, yx] = ddpg_targets(batch.rewards(i), batch.densities(i),
                                               batch.goals(i), q_next(0, i), q_next(0, i), cfg_,
                                               terminal);
            y(i) = feedback_stream ? yf : yx;
          } else {
            y(i) = td_target(batch.rewards(i), batch.densities(i), batch.goals(i), q_next(0, i),
                             cfg_, terminal);
          }
        }
        nn::ForwardCache fc;
        const Eigen::MatrixXd q =
            nn::forward_batch(critics_[c], stack_rows({&batch.states[c], &batch.actions}), &fc);
        const auto mse = nn::mse_grad(q.row(0).transpose(), y);
        loss += mse.loss;
        nn::rmsprop_step(critics_[c], nn::backward_batch(critics_[c], fc, mse.grad.transpose()),
                         critic_opt_[c], cfg_.learning_rate);
      }
      loss_sum += loss;

      // Actor: ascend the sum of the active critics at the actor's own action.
      nn::ForwardCache actor_cache;
      const Eigen::MatrixXd pre = nn::forward_batch(actor_, z_now, &actor_cache);
      const Eigen::MatrixXd a_now = pre.array().tanh().matrix();
      Eigen::MatrixXd action_grad = Eigen::MatrixXd::Zero(action_dim_, b);
      for (std::size_t c = 0; c < critics_.size(); ++c) {
        nn::ForwardCache fc;
        nn::forward_batch(critics_[c], stack_rows({&batch.states[c], &a_now}), &fc);
        Eigen::MatrixXd input_grad;
        nn::backward_batch(critics_[c], fc, Eigen::MatrixXd::Constant(1, b, -inv_b), &input_grad);
        action_grad += input_grad.bottomRows(action_dim_);
      }
      const Eigen::MatrixXd pre_grad =
          (action_grad.array() * (1.0 - a_now.array().square())).matrix() +
          (2.0 * cfg_.actor_preactivation_l2 * inv_b) * pre;
      nn::rmsprop_step(actor_, nn::backward_batch(actor_, actor_cache, pre_grad), actor_opt_,
                       cfg_.learning_rate);

      ++stats.updates;
      if ((s + 1) % interval == 0) sync_targets();
    }
    stats.mean_loss = loss_sum / static_cast<double>(stats.updates);
    return stats;
  }

  std::vector<std::pair<std::string, const nn::DenseNet*>> nets() const override {
    std::vector<std::pair<std::string, const nn::DenseNet*>> out{{"actor", &actor_},
                                                                 {"actor_target", &actor_target_}};
    for (std::size_t c = 0; c < critics_.size(); ++c) {
      const std::string name = critic_name(c);
      out.emplace_back(name, &critics_[c]);
      out.emplace_back(name + "_target", &critic_targets_[c]);
    }
    return out;
  }

 protected:
  std::vector<Eigen::VectorXd> stream_inputs(const Eigen::VectorXd& obs,
                                             const Eigen::VectorXd& feedback) const override {
    if (obs.size() != obs_dim_) throw ConfigError("observation dimension mismatch");
    std::vector<Eigen::VectorXd> out;
    if (has_feedback_) out.push_back(feedback);
    if (has_obs_) out.push_back(cfg_.obs_input_scale * obs);
    return out;
  }

  Eigen::VectorXd greedy(const std::vector<Eigen::VectorXd>& states) const override {
    std::vector<const Eigen::VectorXd*> parts;
    for (const auto& s : states) parts.push_back(&s);
    return nn::forward(actor_, stack_vectors(parts)).array().tanh().matrix();
  }

  std::vector<std::pair<std::string, nn::DenseNet*>> mutable_nets() override {
    std::vector<std::pair<std::string, nn::DenseNet*>> out{{"actor", &actor_},
                                                           {"actor_target", &actor_target_}};
    for (std::size_t c = 0; c < critics_.size(); ++c) {
      const std::string name = critic_name(c);
      out.emplace_back(name, &critics_[c]);
      out.emplace_back(name + "_target", &critic_targets_[c]);
    }
    return out;
  }

  void sync_targets() override {
    target_update(actor_target_, actor_, cfg_.polyak);
    for (std::size_t c = 0; c < critics_.size(); ++c) {
      target_update(critic_targets_[c], critics_[c], cfg_.polyak);
    }
  }

  void reset_optimizers() override {
    critic_opt_.clear();
    for (const auto& c : critics_) {
      critic_opt_.push_back(nn::RmsPropState::for_net(c, cfg_.rmsprop_smoothing, cfg_.rmsprop_epsilon));
    }
    actor_opt_ = nn::RmsPropState::for_net(actor_, cfg_.rmsprop_smoothing, cfg_.rmsprop_epsilon);
  }

 private:
  std::string critic_name(std::size_t c) const {
    return (has_feedback_ && c == 0) ? "critic_feedback" : "critic_obs";
  }

  bool has_feedback_ = false;
  bool has_obs_ = false;
  std::vector<nn::DenseNet> critics_;
  std::vector<nn::DenseNet> critic_targets_;
  nn::DenseNet actor_;
  nn::DenseNet actor_target_;
  std::vector<nn::RmsPropState> critic_opt_;
  nn::RmsPropState actor_opt_;
};

std::string join_sizes(const std::vector<EsnParams>& esn) {
  std::string out;
  for (std::size_t i = 0; i < esn.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(esn[i].size());
  }
  return out;
}

}  // namespace

std::unique_ptr<Explorer> make_dqn_explorer(ConditionMode mode, int obs_dim, int actions,
                                            const ExplorerConfig& cfg, std::uint64_t seed) {
  return std::make_unique<DqnExplorer>(mode, obs_dim, actions, cfg, seed,
                                       std::vector<Eigen::Index>{});
}

std::unique_ptr<Explorer> make_ddpg_explorer(ConditionMode mode, int obs_dim, int action_dim,
                                             const ExplorerConfig& cfg, std::uint64_t seed) {
  return std::make_unique<DdpgExplorer>(mode, obs_dim, action_dim, cfg, seed,
                                        std::vector<Eigen::Index>{});
}

void Explorer::save(const fs::path& dir, const std::string& config_hash) const {
  fs::create_directories(dir);
  std::ostringstream manifest;
  manifest << "format = novex-model\n"
           << "version = 1\n"
           << "kind = " << kind_ << "\n"
           << "mode = " << to_string(mode_) << "\n"
           << "obs_dim = " << obs_dim_ << "\n"
           << "action_dim = " << action_dim_ << "\n"
           << "density_bins = " << cfg_.density_bins << "\n"
           << "seed = " << seed_ << "\n"
           << "reservoir_sizes = " << join_sizes(esn_) << "\n";
  manifest.precision(17);
  manifest << "spectral_radius = " << cfg_.spectral_radius << "\n"
           << "esn_connectivity = " << cfg_.esn_connectivity << "\n"
           << "config_hash = " << config_hash << "\n";
  for (const auto& [name, net] : nets()) {
    nn::save_net(*net, dir / (name + ".nvxw"));
    manifest << "net = " << name << "\n";
  }
  std::ofstream out(dir / "manifest.txt", std::ios::trunc);
  out << manifest.str();
  if (!out) throw ConfigError("cannot write " + (dir / "manifest.txt").string());
}

std::unique_ptr<Explorer> load_explorer(const fs::path& dir, const ExplorerConfig& cfg) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw ConfigError("no model manifest in " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const auto key = line.substr(0, eq);
    if (key == "net") continue;
    kv[key] = line.substr(eq + 3);
  }
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("model manifest lacks '" + key + "'");
    return it->second;
  };
  if (get("format") != "novex-model" || get("version") != "1") {
    throw ConfigError("unsupported model manifest in " + dir.string());
  }
  ExplorerConfig c = cfg;
  c.spectral_radius = std::stod(get("spectral_radius"));
  c.esn_connectivity = std::stod(get("esn_connectivity"));
  c.density_bins = std::stoul(get("density_bins"));
  std::vector<Eigen::Index> sizes;
  std::stringstream ss(get("reservoir_sizes"));
  for (std::string tok; std::getline(ss, tok, ',');) sizes.push_back(std::stol(tok));

  const auto mode = parse_condition_mode(get("mode"));
  const int obs_dim = std::stoi(get("obs_dim"));
  const int action_dim = std::stoi(get("action_dim"));
  const auto seed = std::stoull(get("seed"));
  std::unique_ptr<Explorer> ex;
  if (get("kind") == "dqn") {
    ex = std::make_unique<DqnExplorer>(mode, obs_dim, action_dim, c, seed, sizes);
  } else if (get("kind") == "ddpg") {
    ex = std::make_unique<DdpgExplorer>(mode, obs_dim, action_dim, c, seed, sizes);
  } else {
    throw ConfigError("unknown model kind '" + get("kind") + "'");
  }
  for (auto& [name, net] : ex->mutable_nets()) {
    auto loaded = nn::load_net(dir / (name + ".nvxw"));
    if (loaded.in_dim() != net->in_dim() || loaded.out_dim() != net->out_dim()) {
      throw ConfigError("model network '" + name + "' does not match the reservoir sizes");
    }
    *net = std::move(loaded);
  }
  ex->reset_optimizers();
  return ex;
}

}  // namespace novex
