#include "novex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "novex/density.hpp"
#include "novex/errors.hpp"
#include "novex/graph_maze.hpp"
#include "novex/maze.hpp"
#include "novex/recode.hpp"
#include "novex/replay.hpp"
#include "novex/version.hpp"

namespace novex {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Outcome {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
};

class TaskEnv {
 public:
  virtual ~TaskEnv() = default;
  virtual Eigen::VectorXd begin_episode(std::uint64_t episode) = 0;
  virtual Outcome step(const Action& action) = 0;
  virtual double lifetime_coverage() const = 0;
  virtual double episode_coverage() const = 0;
  virtual int obs_dim() const = 0;
  virtual bool discrete() const = 0;
  virtual std::string trace_header() const = 0;
  virtual std::string trace_row(const Eigen::VectorXd& obs, const Action& action) const = 0;
  virtual void export_layout(const fs::path& path) const = 0;
};

class ContinuousTask final : public TaskEnv {
 public:
  explicit ContinuousTask(const RunConfig& cfg) : cfg_(cfg), kind_(cfg.task_kind()) {
    maze::Dynamics dyn;
    dyn.step_scale = cfg.step_scale;
    dyn.episode_length = cfg.episode_length;
    dyn.continual = kind_ == TaskKind::kContinual;
    std::optional<maze::NoisyWrap> noise;
    auto layout = initial_layout();
    if (kind_ == TaskKind::kNoisy) {
      noise.emplace(maze::default_noise_zones(layout), derive_seed(cfg.seed, 13));
    }
    env_ = std::make_unique<maze::MazeEnv>(std::move(layout), dyn, std::move(noise));
  }

  Eigen::VectorXd begin_episode(std::uint64_t episode) override {
    if (kind_ == TaskKind::kRandom) {
      env_->set_maze(maze::maze_random_prim(cfg_.rows(), cfg_.cols(),
                                            derive_seed(cfg_.resolved_maze_seed(), episode)));
    }
    const bool continuing = kind_ == TaskKind::kContinual && last_.size() > 0;
    auto r = env_->reset();
    if (!continuing) last_ = r.observation;
    return last_;
  }

  Outcome step(const Action& action) override {
    const auto r = env_->step({action.encoding(0), action.encoding(1)});
    last_ = r.observation;
    return {r.observation, r.reward, r.done};
  }

  double lifetime_coverage() const override { return env_->lifetime_coverage(); }
  double episode_coverage() const override { return env_->episode_coverage(); }
  int obs_dim() const override { return env_->observation_dim(); }
  bool discrete() const override { return false; }

  std::string trace_header() const override {
    return obs_dim() == 3 ? "t,episode,x,y,noise,ax,ay,d_norm" : "t,episode,x,y,ax,ay,d_norm";
  }
  std::string trace_row(const Eigen::VectorXd& obs, const Action& a) const override {
    std::string out;
    for (Eigen::Index i = 0; i < obs.size(); ++i) out += num(obs(i)) + ",";
    out += num(a.encoding(0)) + "," + num(a.encoding(1));
    return out;
  }
  void export_layout(const fs::path& path) const override { maze::save_maze(env_->spec(), path); }

 private:
  maze::MazeSpec initial_layout() const {
    switch (kind_) {
      case TaskKind::kFixed:
      case TaskKind::kNoisy:
        return cfg_.maze_file.empty() ? maze::maze_fixed() : maze::load_maze(cfg_.maze_file);
      case TaskKind::kFixedSmall:
        return cfg_.maze_file.empty() ? maze::maze_fixed_small() : maze::load_maze(cfg_.maze_file);
      case TaskKind::kRandom:
        return maze::maze_random_prim(cfg_.rows(), cfg_.cols(),
                                      derive_seed(cfg_.resolved_maze_seed(), 0));
      default:
        return maze::maze_random_prim(cfg_.rows(), cfg_.cols(), cfg_.resolved_maze_seed());
    }
  }

  RunConfig cfg_;
  TaskKind kind_;
  std::unique_ptr<maze::MazeEnv> env_;
  Eigen::VectorXd last_;
};

class GraphTask final : public TaskEnv {
 public:
  explicit GraphTask(const RunConfig& cfg) : cfg_(cfg) {
    const auto seed = cfg.resolved_maze_seed();
    maze_ = graph::make_graph_maze(graph::wilson_maze(cfg.rows(), cfg.cols(), seed), cfg.graph_dim(),
                                   derive_seed(seed, 1));
    lifetime_.assign(static_cast<std::size_t>(maze_.state_count()), 0);
  }

  Eigen::VectorXd begin_episode(std::uint64_t) override {
    state_ = maze_.start_state;
    steps_ = 0;
    episode_.assign(lifetime_.size(), 0);
    mark();
    return maze_.observe(state_);
  }

  Outcome step(const Action& action) override {
    const auto r = graph::graph_step(maze_, state_, action.id);
    state_ = r.next_state;
    ++steps_;
    mark();
    return {r.observation, 0.0, steps_ >= cfg_.episode_length};
  }

  double lifetime_coverage() const override { return fraction(lifetime_); }
  double episode_coverage() const override { return fraction(episode_); }
  int obs_dim() const override { return maze_.observation_dim(); }
  bool discrete() const override { return true; }
  std::string trace_header() const override { return "t,episode,state,action,d_norm"; }
  std::string trace_row(const Eigen::VectorXd&, const Action& a) const override {
    return std::to_string(traced_state_) + "," + std::to_string(a.id);
  }
  void export_layout(const fs::path& path) const override { graph::export_transitions(maze_, path); }

  void note_state() { traced_state_ = state_; }

 private:
  void mark() {
    lifetime_[static_cast<std::size_t>(state_)] = 1;
    episode_[static_cast<std::size_t>(state_)] = 1;
  }
  static double fraction(const std::vector<std::uint8_t>& v) {
    return static_cast<double>(std::count(v.begin(), v.end(), 1)) / static_cast<double>(v.size());
  }

  RunConfig cfg_;
  graph::GraphMaze maze_;
  std::vector<std::uint8_t> lifetime_;
  std::vector<std::uint8_t> episode_;
  int state_ = 0;
  int traced_state_ = 0;
  int steps_ = 0;
};

std::unique_ptr<TaskEnv> make_task(const RunConfig& cfg) {
  if (cfg.task_kind() == TaskKind::kGraph) return std::make_unique<GraphTask>(cfg);
  return std::make_unique<ContinuousTask>(cfg);
}

Action uniform_action(bool discrete, Rng& rng) {
  if (discrete) {
    const int id = static_cast<int>(uniform_index(rng, graph::kActionCount));
    Action a{id, Eigen::VectorXd::Zero(graph::kActionCount)};
    a.encoding(id) = 1.0;
    return a;
  }
  return Action{-1, Eigen::Vector2d(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))};
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& status) {
  std::ostringstream out;
  out << "# novex " << kVersion << "\n"
      << "# status: " << status << "\n"
      << "# config_hash: " << config_hash(cfg) << "\n"
      << format_run_config(cfg);
  if (!cfg.source.empty()) {
    out << "# source configuration, verbatim:\n";
    std::istringstream src(cfg.source);
    for (std::string line; std::getline(src, line);) out << "#| " << line << "\n";
  }
  const auto tmp = dir / "manifest.txt.tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    f << out.str();
  }
  fs::rename(tmp, dir / "manifest.txt");
}

class LineLog {
 public:
  LineLog() = default;
  LineLog(const fs::path& path, const std::string& header) : out_(path, std::ios::trunc) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    line(header);
  }
  bool open() const { return out_.is_open(); }
  void line(const std::string& text) {
    out_ << text << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace

std::string episode_csv_header() {
  return "episode,total_steps,coverage,episode_coverage,goal_density,record,epsilon,mean_loss,"
         "replay_steps,goal_episodes,centroids";
}

std::string episode_csv_row(const EpisodeRow& r) {
  return std::to_string(r.episode) + "," + std::to_string(r.total_steps) + "," + num(r.coverage) +
         "," + num(r.episode_coverage) + "," + num(r.goal_density) + "," + num(r.record) + "," +
         num(r.epsilon) + "," + num(r.mean_loss) + "," + std::to_string(r.replay_steps) + "," +
         std::to_string(r.goal_episodes) + "," + std::to_string(r.centroids);
}

std::vector<EpisodeRow> read_episode_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != episode_csv_header()) throw ConfigError(path.string() + ": unexpected header");
  std::vector<EpisodeRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
    if (f.size() != 11) throw ConfigError(path.string() + ": malformed row '" + line + "'");
    EpisodeRow r;
    r.episode = std::stoull(f[0]);
    r.total_steps = std::stoull(f[1]);
    r.coverage = std::stod(f[2]);
    r.episode_coverage = std::stod(f[3]);
    r.goal_density = std::stod(f[4]);
    r.record = std::stod(f[5]);
    r.epsilon = std::stod(f[6]);
    r.mean_loss = std::stod(f[7]);
    r.replay_steps = std::stoull(f[8]);
    r.goal_episodes = std::stoull(f[9]);
    r.centroids = std::stoull(f[10]);
    rows.push_back(r);
  }
  return rows;
}

double final_score(const std::vector<EpisodeRow>& rows, TaskKind task) {
  if (rows.empty()) return 0.0;
  if (task != TaskKind::kRandom) return rows.back().coverage;
  const std::size_t n = std::max<std::size_t>(1, rows.size() / 10);
  double sum = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) sum += rows[i].episode_coverage;
  return sum / static_cast<double>(n);
}

RunResult run_experiment(const RunConfig& cfg, RunOptions options) {
  cfg.validate();
  const auto& ecfg = cfg.explorer;
  auto env = make_task(cfg);
  auto* graph_env = dynamic_cast<GraphTask*>(env.get());
  const int obs_dim = env->obs_dim();
  const int action_dim = env->discrete() ? graph::kActionCount : 2;

  RunResult result;
  std::unique_ptr<Explorer> explorer = std::move(options.explorer);
  if (!explorer && !cfg.random_baseline()) {
    explorer = env->discrete()
                   ? make_dqn_explorer(cfg.condition_mode(), obs_dim, action_dim, ecfg, cfg.seed)
                   : make_ddpg_explorer(cfg.condition_mode(), obs_dim, action_dim, ecfg, cfg.seed);
  }
  if (explorer) {
    if (explorer->obs_dim() != obs_dim || explorer->action_dim() != action_dim ||
        (explorer->action_space() == ActionSpace::kDiscrete) != env->discrete()) {
      throw ConfigError("model expects observation dim " + std::to_string(explorer->obs_dim()) +
                        " and action dim " + std::to_string(explorer->action_dim()) +
                        ", task provides " + std::to_string(obs_dim) + " and " +
                        std::to_string(action_dim));
    }
    if (explorer->config().density_bins != ecfg.density_bins) {
      throw ConfigError("model density bin count differs from the configuration");
    }
  }

  Rng policy_rng(derive_seed(cfg.seed, 1));
  Rng recode_rng(derive_seed(cfg.seed, 2));
  Rng train_rng(derive_seed(cfg.seed, 3));

  ObservationMemory memory(static_cast<std::size_t>(obs_dim));
  CentroidBuffer centroids(static_cast<std::size_t>(obs_dim));
  DensityLedger ledger;
  ReplayStore store(ecfg.replay_steps, ecfg.goal_replay_steps);
  const bool training = explorer && options.train;

  const bool writing = !options.out_dir.empty();
  LineLog episode_log;
  LineLog trace_log;
  if (writing) {
    fs::create_directories(options.out_dir);
    write_manifest(options.out_dir, cfg, "running");
    episode_log = LineLog(options.out_dir / "episodes.csv", episode_csv_header());
    if (cfg.trace) trace_log = LineLog(options.out_dir / "trace.csv", env->trace_header());
    env->export_layout(options.out_dir / (env->discrete() ? "transitions.txt" : "maze.txt"));
  }

  // Until the reference set holds k points the estimate is dominated by the few
  // earliest observations, so those steps get the max-novelty default instead.
  auto query = [&](const Eigen::VectorXd& x) -> std::optional<double> {
    const std::span<const double> s(x.data(), static_cast<std::size_t>(x.size()));
    if (ecfg.use_recode) {
      if (centroids.size() < ecfg.density_k) return std::nullopt;
      return knn_negdensity(s, centroids.positions, ecfg.density_k);
    }
    if (memory.all().size() < ecfg.density_k) return std::nullopt;
    return memory.negdensity(s, ecfg.density_k);
  };

  Eigen::VectorXd prev_action = Eigen::VectorXd::Zero(action_dim);
  double reward = 0.0;
  std::uint64_t global_step = 0;
  std::uint64_t episode = 0;
  const bool continual = cfg.task_kind() == TaskKind::kContinual;

  try {
    while (global_step < cfg.total_steps) {
      Eigen::VectorXd x = env->begin_episode(episode);
      if (!continual) reward = 0.0;
      auto record = std::make_shared<EpisodeRecord>();
      record->episode_index = episode;
      record->prev_action = prev_action;
      if (explorer) record->initial_reservoirs = explorer->reservoir_states();

      std::vector<Eigen::VectorXd> observations;
      std::vector<Eigen::VectorXd> actions;
      bool done = false;
      int steps = 0;
      double epsilon = 1.0;
      while (true) {
        const auto d = query(x);
        const double d_norm = d ? ledger.append(*d) : ledger.append_default();
        const auto feedback = build_feedback(prev_action, reward, d_norm, ecfg.density_bins);
        epsilon = options.fixed_epsilon ? *options.fixed_epsilon
                                        : epsilon_at(global_step, episode, ecfg);
        const Action action = explorer ? explorer->act(x, feedback, epsilon, policy_rng)
                                       : uniform_action(env->discrete(), policy_rng);

        observations.push_back(x);
        actions.push_back(action.encoding);
        if (action.id >= 0) record->action_ids.push_back(action.id);
        record->rewards.push_back(reward);
        record->densities.push_back(d.value_or(0.0));
        record->densities_norm.push_back(d_norm);

        const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
        memory.add(xs);
        if (ecfg.use_recode) recode_update(centroids, xs, ecfg.recode, recode_rng);

        if (graph_env) graph_env->note_state();
        if (trace_log.open()) {
          trace_log.line(std::to_string(global_step) + "," + std::to_string(episode) + "," +
                         env->trace_row(x, action) + "," + num(d_norm));
        }
        const Outcome out = env->step(action);
        ++global_step;
        ++steps;
        prev_action = action.encoding;
        reward = out.reward;
        x = out.observation;
        done = out.done;
        if (done || (continual && steps >= cfg.episode_length) || global_step >= cfg.total_steps) {
          break;
        }
      }

      const auto d_final = query(x);
      observations.push_back(x);
      record->rewards.push_back(reward);
      record->densities.push_back(d_final.value_or(0.0));
      record->densities_norm.push_back(d_final ? normalize_density(*d_final, ledger) : 1.0);
      record->terminal = done && !continual;
      record->observations.resize(obs_dim, static_cast<Eigen::Index>(observations.size()));
      for (std::size_t i = 0; i < observations.size(); ++i) {
        record->observations.col(static_cast<Eigen::Index>(i)) = observations[i];
      }
      record->actions.resize(action_dim, static_cast<Eigen::Index>(actions.size()));
      for (std::size_t i = 0; i < actions.size(); ++i) {
        record->actions.col(static_cast<Eigen::Index>(i)) = actions[i];
      }
      record->update_goal();
      const double goal_density = record->goal_density;
      if (training) store.finalize_episode(std::move(record));
      ++episode;

      TrainStats stats;
      if (training && ecfg.epochs_per_episode > 0) {
        const bool from_centroids = ecfg.use_recode && cfg.goals_from_centroids;
        const KnnIndex index = from_centroids ? KnnIndex(centroids.positions)
                                              : KnnIndex(memory.unique(), memory.counts());
        const double scale = ledger.running_max();
        store.attach_global_goals([&](std::span<const double> p) {
          const std::size_t k = ecfg.density_k + (!from_centroids && memory.count(p) > 0 ? 1 : 0);
          const auto g = index.total_count() > (from_centroids ? 0u : 1u) ? index.kth(p, k)
                                                                          : std::nullopt;
          if (ecfg.raw_density_targets) return g ? *g : scale;
          return g ? normalize_density(*g, scale) : 1.0;
        });
        double loss = 0.0;
        for (int e = 0; e < ecfg.epochs_per_episode; ++e) {
          const auto s = explorer->train_epoch(store, train_rng);
          loss += s.mean_loss;
          stats.updates += s.updates;
        }
        stats.mean_loss = loss / ecfg.epochs_per_episode;
      }

      EpisodeRow row;
      row.episode = episode - 1;
      row.total_steps = global_step;
      row.coverage = env->lifetime_coverage();
      row.episode_coverage = env->episode_coverage();
      row.goal_density = goal_density;
      row.record = store.record().value_or(goal_density);
      row.epsilon = explorer ? epsilon : 1.0;
      row.mean_loss = stats.mean_loss;
      row.replay_steps = store.main_steps();
      row.goal_episodes = store.goal().size();
      row.centroids = centroids.size();
      result.episodes.push_back(row);
      if (episode_log.open()) episode_log.line(episode_csv_row(row));
    }
  } catch (const DivergenceError& e) {
    result.failed = true;
    result.failure = e.what();
  }

  result.score = final_score(result.episodes, cfg.task_kind());

  // Most novel stored observation: largest negative density against everything else.
  if (memory.unique().size() > 1) {
    const KnnIndex index(memory.unique(), memory.counts());
    double best = -1.0;
    for (std::size_t i = 0; i < memory.unique().size(); ++i) {
      const auto g = index.kth(memory.unique()[i], ecfg.density_k + 1);
      if (g && *g > best) {
        best = *g;
        const auto p = memory.unique()[i];
        result.lowest_density_point.assign(p.begin(), p.end());
      }
    }
    result.lowest_density_point.push_back(best);
  }

  if (writing) {
    if (ecfg.use_recode) write_centroids(centroids, options.out_dir / "centroids.csv");
    if (!result.lowest_density_point.empty()) {
      std::ofstream f(options.out_dir / "lowest_density.csv", std::ios::trunc);
      for (int i = 0; i < obs_dim; ++i) f << "x" << i << ",";
      f << "negdensity\n";
      for (std::size_t i = 0; i < result.lowest_density_point.size(); ++i) {
        f << (i ? "," : "") << num(result.lowest_density_point[i]);
      }
      f << "\n";
    }
    if (explorer && options.save_model) explorer->save(options.out_dir / "model", config_hash(cfg));
    write_manifest(options.out_dir, cfg,
                   result.failed ? "failed: " + result.failure : std::string("complete"));
  }
  result.explorer = std::move(explorer);
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<CurvePoint> coverage_curve(const std::vector<std::vector<EpisodeRow>>& runs,
                                       std::uint64_t interval, std::uint64_t total_steps) {
  if (interval == 0) throw ConfigError("coverage_curve: interval must be positive");
  std::vector<CurvePoint> out;
  if (runs.empty()) return out;
  for (std::uint64_t s = interval; s <= total_steps; s += interval) {
    std::vector<double> values;
    for (const auto& rows : runs) {
      double v = 0.0;
      for (const auto& r : rows) {
        if (r.total_steps > s) break;
        v = r.coverage;
      }
      values.push_back(v);
    }
    out.push_back({s, median(values), *std::min_element(values.begin(), values.end()),
                   *std::max_element(values.begin(), values.end())});
  }
  return out;
}

ConditionSummary summarize_scores(const std::string& label, const std::vector<double>& scores,
                                  double threshold) {
  if (scores.empty()) throw ConfigError("summarize: no runs for '" + label + "'");
  ConditionSummary s;
  s.label = label;
  s.runs = scores.size();
  s.top = *std::max_element(scores.begin(), scores.end());
  s.bottom = *std::min_element(scores.begin(), scores.end());
  s.median = median(scores);
  s.bottom_excluding = s.bottom;
  double lowest_ok = std::numeric_limits<double>::infinity();
  for (double v : scores) {
    if (v < threshold) {
      ++s.pathological;
    } else {
      lowest_ok = std::min(lowest_ok, v);
    }
  }
  if (std::isfinite(lowest_ok)) s.bottom_excluding = lowest_ok;
  return s;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < std::min(n, count); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

void write_scores(const fs::path& path, std::uint64_t first, const std::vector<double>& scores) {
  std::ofstream f(path, std::ios::trunc);
  f << "seed,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) f << first + i << "," << num(scores[i]) << "\n";
}

void write_curve(const fs::path& path, const std::vector<CurvePoint>& curve) {
  std::ofstream f(path, std::ios::trunc);
  f << "step,median,min,max\n";
  for (const auto& p : curve) {
    f << p.step << "," << num(p.median) << "," << num(p.min) << "," << num(p.max) << "\n";
  }
}

std::vector<fs::path> run_dirs(const fs::path& dir) {
  std::vector<fs::path> out;
  if (fs::exists(dir / "episodes.csv")) return {dir};
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "episodes.csv")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<double> run_sweep(const RunConfig& base, std::uint64_t first, std::uint64_t last,
                              int workers, const fs::path& out_dir) {
  if (last < first) throw ConfigError("seed range is empty");
  const std::size_t count = last - first + 1;
  std::vector<double> scores(count, 0.0);
  std::vector<std::vector<EpisodeRow>> logs(count);
  parallel_for(count, workers, [&](std::size_t i) {
    RunConfig cfg = base;
    cfg.seed = first + i;
    RunOptions opts;
    opts.out_dir = out_dir / ("seed_" + std::to_string(cfg.seed));
    auto r = run_experiment(cfg, std::move(opts));
    scores[i] = r.score;
    logs[i] = std::move(r.episodes);
  });
  fs::create_directories(out_dir);
  write_scores(out_dir / "scores.csv", first, scores);
  write_curve(out_dir / "summary.csv",
              coverage_curve(logs, static_cast<std::uint64_t>(base.episode_length), base.total_steps));
  return scores;
}

DeployScores run_deploy(const fs::path& model_dir, const RunConfig& base, std::uint64_t first,
                        std::uint64_t last, int workers, const fs::path& out_dir) {
  if (last < first) throw ConfigError("seed range is empty");
  const std::size_t count = last - first + 1;
  DeployScores scores;
  scores.pretrained.resize(count);
  scores.untrained.resize(count);
  const auto probe = load_explorer(model_dir, base.explorer);
  const std::string mode = to_string(probe->mode());
  parallel_for(2 * count, workers, [&](std::size_t job) {
    const std::size_t i = job / 2;
    const bool pretrained = job % 2 == 0;
    RunConfig cfg = base;
    cfg.seed = first + i;
    cfg.mode = mode;
    RunOptions opts;
    opts.train = false;
    opts.save_model = false;
    opts.fixed_epsilon = cfg.explorer.epsilon_min;
    if (pretrained) opts.explorer = load_explorer(model_dir, cfg.explorer);
    if (!out_dir.empty()) {
      opts.out_dir = out_dir / (pretrained ? "pretrained" : "untrained") /
                     ("seed_" + std::to_string(cfg.seed));
    }
    const auto r = run_experiment(cfg, std::move(opts));
    (pretrained ? scores.pretrained : scores.untrained)[i] = r.score;
  });
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_scores(out_dir / "pretrained_scores.csv", first, scores.pretrained);
    write_scores(out_dir / "untrained_scores.csv", first, scores.untrained);
  }
  return scores;
}

std::vector<ConditionSummary> summarize_runs(const std::vector<fs::path>& dirs, double threshold) {
  std::vector<ConditionSummary> out;
  for (const auto& dir : dirs) {
    std::vector<double> scores;
    for (const auto& run : run_dirs(dir)) {
      const auto cfg = load_run_config(run / "manifest.txt");
      scores.push_back(final_score(read_episode_log(run / "episodes.csv"), cfg.task_kind()));
    }
    auto label = dir.filename().string();
    if (label.empty()) label = dir.parent_path().filename().string();
    out.push_back(summarize_scores(label, scores, threshold));
  }
  return out;
}

std::string format_summary_table(const std::vector<ConditionSummary>& rows) {
  std::string out = "condition,runs,top,bottom,bottom_excluding,median,pathological\n";
  for (const auto& r : rows) {
    out += r.label + "," + std::to_string(r.runs) + "," + num(r.top) + "," + num(r.bottom) + "," +
           num(r.bottom_excluding) + "," + num(r.median) + "," + std::to_string(r.pathological) +
           "\n";
  }
  return out;
}

void export_task_maze(const RunConfig& cfg, const fs::path& path) {
  auto env = make_task(cfg);
  env->begin_episode(0);
  env->export_layout(path);
}

}  // namespace novex
