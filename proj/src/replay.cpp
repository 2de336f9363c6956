#include "novex/replay.hpp"

#include <string>
#include <unordered_map>

#include "novex/errors.hpp"

namespace novex {

void EpisodeRecord::update_goal() {
  goal_step = 0;
  goal_density = densities.empty() ? 0.0 : densities[0];
  for (std::size_t i = 1; i < densities.size(); ++i) {
    if (densities[i] > goal_density) {
      goal_density = densities[i];
      goal_step = i;
    }
  }
}

void EpisodeRecord::validate() const {
  const std::size_t n = steps() + 1;
  if (steps() < 1) throw ConfigError("EpisodeRecord: empty episode");
  if (static_cast<std::size_t>(observations.cols()) != n || rewards.size() != n ||
      densities.size() != n || densities_norm.size() != n) {
    throw ConfigError("EpisodeRecord: per-step arrays disagree in length");
  }
  if (!goals.empty() && goals.size() != n) throw ConfigError("EpisodeRecord: goals length");
  if (!action_ids.empty() && action_ids.size() != steps()) {
    throw ConfigError("EpisodeRecord: action id length");
  }
  if (prev_action.size() != actions.rows()) throw ConfigError("EpisodeRecord: prev_action size");
  if (goal_step >= n || densities[goal_step] != goal_density) {
    throw ConfigError("EpisodeRecord: goal step inconsistent with densities");
  }
}

bool ReplayStore::finalize_episode(std::shared_ptr<EpisodeRecord> episode) {
  episode->validate();
  const std::size_t steps = episode->steps();
  main_.push_back(episode);
  main_steps_ += steps;
  while (main_steps_ > main_capacity_ && main_.size() > 1) {
    main_steps_ -= main_.front()->steps();
    main_.pop_front();
  }

  const bool record_broken = !record_ || episode->goal_density > *record_;
  if (record_broken) {
    record_ = episode->goal_density;
    goal_.push_back(episode);
    goal_steps_ += steps;
    while (goal_steps_ > goal_capacity_ && goal_.size() > 1) {
      goal_steps_ -= goal_.front()->steps();
      goal_.pop_front();
    }
  }
  return record_broken;
}

std::vector<ReplayDraw> ReplayStore::sample_schedule(std::size_t minibatch_index,
                                                     std::size_t minibatch_steps,
                                                     Rng& rng) const {
  std::vector<ReplayDraw> draws;
  if (main_.empty()) return draws;
  const bool use_goal = minibatch_index == 0 && !goal_.empty();
  const auto& pool = use_goal ? goal_ : main_;
  const auto source = use_goal ? ReplaySource::kGoalBuffer : ReplaySource::kMainBuffer;

  std::size_t covered = 0;
  if (minibatch_index == 1) {
    draws.push_back({main_.back(), source});
    covered += main_.back()->steps();
  }
  while (covered < minibatch_steps || draws.empty()) {
    const auto& ep = pool[uniform_index(rng, pool.size())];
    draws.push_back({ep, source});
    covered += ep->steps();
  }
  return draws;
}

void ReplayStore::attach_global_goals(
    const std::function<double(std::span<const double>)>& goal_of) {
  std::unordered_map<const EpisodeRecord*, bool> done;
  auto attach = [&](EpisodeRecord& ep) {
    if (!done.emplace(&ep, true).second) return;
    const auto n = static_cast<std::size_t>(ep.observations.cols());
    ep.goals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto col = ep.observations.col(static_cast<Eigen::Index>(i));
      ep.goals[i] = goal_of({col.data(), static_cast<std::size_t>(col.size())});
    }
  };
  for (auto& ep : main_) attach(*ep);
  for (auto& ep : goal_) attach(*ep);
}

}  // namespace novex
