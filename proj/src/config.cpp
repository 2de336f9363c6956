#include "novex/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "novex/errors.hpp"

namespace novex {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string show(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + text + "'");
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Access>
Field number_field(const std::string& key, Access access) {
  return {[key, access](RunConfig& c, const std::string& v) { access(c) = parse_number<T>(key, v); },
          [access](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return show(access(const_cast<RunConfig&>(c)));
            } else {
              return std::to_string(access(const_cast<RunConfig&>(c)));
            }
          }};
}

template <typename Access>
Field bool_field(const std::string& key, Access access) {
  return {[key, access](RunConfig& c, const std::string& v) { access(c) = parse_bool(key, v); },
          [access](const RunConfig& c) {
            return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

template <typename Access>
Field string_field(Access access) {
  return {[access](RunConfig& c, const std::string& v) { access(c) = v; },
          [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)); }};
}

#define NVX_REF(expr) [](RunConfig & c) -> auto& { return c.expr; }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"task", string_field(NVX_REF(task))},
      {"mode", string_field(NVX_REF(mode))},
      {"seed", number_field<std::uint64_t>("seed", NVX_REF(seed))},
      {"total_steps", number_field<std::uint64_t>("total_steps", NVX_REF(total_steps))},
      {"episode_length", number_field<int>("episode_length", NVX_REF(episode_length))},
      {"step_scale", number_field<double>("step_scale", NVX_REF(step_scale))},
      {"maze_rows", number_field<int>("maze_rows", NVX_REF(maze_rows))},
      {"maze_cols", number_field<int>("maze_cols", NVX_REF(maze_cols))},
      {"maze_seed", number_field<std::int64_t>("maze_seed", NVX_REF(maze_seed))},
      {"maze_file", string_field(NVX_REF(maze_file))},
      {"trace", bool_field("trace", NVX_REF(trace))},
      {"goals_from_centroids", bool_field("goals_from_centroids", NVX_REF(goals_from_centroids))},
      {"learning_rate", number_field<double>("learning_rate", NVX_REF(explorer.learning_rate))},
      {"gamma", number_field<double>("gamma", NVX_REF(explorer.gamma))},
      {"beta_d", number_field<double>("beta_d", NVX_REF(explorer.beta_d))},
      {"beta_g", number_field<double>("beta_g", NVX_REF(explorer.beta_g))},
      {"train_steps_per_epoch",
       number_field<int>("train_steps_per_epoch", NVX_REF(explorer.train_steps_per_epoch))},
      {"target_updates_per_epoch",
       number_field<int>("target_updates_per_epoch", NVX_REF(explorer.target_updates_per_epoch))},
      {"polyak", number_field<double>("polyak", NVX_REF(explorer.polyak))},
      {"epochs_per_episode",
       number_field<int>("epochs_per_episode", NVX_REF(explorer.epochs_per_episode))},
      {"replay_steps", number_field<std::size_t>("replay_steps", NVX_REF(explorer.replay_steps))},
      {"goal_replay_steps",
       number_field<std::size_t>("goal_replay_steps", NVX_REF(explorer.goal_replay_steps))},
      {"minibatch", number_field<std::size_t>("minibatch", NVX_REF(explorer.minibatch))},
      {"hidden_size", number_field<int>("hidden_size", NVX_REF(explorer.hidden_size))},
      {"hidden_layers", number_field<int>("hidden_layers", NVX_REF(explorer.hidden_layers))},
      {"feedback_esn_size",
       number_field<int>("feedback_esn_size", NVX_REF(explorer.feedback_esn_size))},
      {"obs_esn_per_dim", number_field<int>("obs_esn_per_dim", NVX_REF(explorer.obs_esn_per_dim))},
      {"obs_esn_max", number_field<int>("obs_esn_max", NVX_REF(explorer.obs_esn_max))},
      {"obs_input_scale", number_field<double>("obs_input_scale", NVX_REF(explorer.obs_input_scale))},
      {"spectral_radius", number_field<double>("spectral_radius", NVX_REF(explorer.spectral_radius))},
      {"esn_connectivity",
       number_field<double>("esn_connectivity", NVX_REF(explorer.esn_connectivity))},
      {"density_k", number_field<std::size_t>("density_k", NVX_REF(explorer.density_k))},
      {"density_bins", number_field<std::size_t>("density_bins", NVX_REF(explorer.density_bins))},
      {"epsilon_initial", number_field<double>("epsilon_initial", NVX_REF(explorer.epsilon_initial))},
      {"epsilon_min", number_field<double>("epsilon_min", NVX_REF(explorer.epsilon_min))},
      {"epsilon_decay", number_field<double>("epsilon_decay", NVX_REF(explorer.epsilon_decay))},
      {"epsilon_initial_steps",
       number_field<std::uint64_t>("epsilon_initial_steps", NVX_REF(explorer.epsilon_initial_steps))},
      {"use_recode", bool_field("use_recode", NVX_REF(explorer.use_recode))},
      {"raw_density_targets",
       bool_field("raw_density_targets", NVX_REF(explorer.raw_density_targets))},
      {"recode_kappa", number_field<double>("recode_kappa", NVX_REF(explorer.recode.kappa))},
      {"recode_decay", number_field<double>("recode_decay", NVX_REF(explorer.recode.decay))},
      {"recode_insertion_probability",
       number_field<double>("recode_insertion_probability",
                            NVX_REF(explorer.recode.insertion_probability))},
      {"recode_discount", number_field<double>("recode_discount", NVX_REF(explorer.recode.discount))},
      {"recode_capacity",
       number_field<std::size_t>("recode_capacity", NVX_REF(explorer.recode.capacity))},
      {"main_goal_multiplier",
       number_field<double>("main_goal_multiplier", NVX_REF(explorer.main_goal_multiplier))},
      {"goal_buffer_goal_multiplier",
       number_field<double>("goal_buffer_goal_multiplier",
                            NVX_REF(explorer.goal_buffer_goal_multiplier))},
      {"actor_preactivation_l2",
       number_field<double>("actor_preactivation_l2", NVX_REF(explorer.actor_preactivation_l2))},
      {"rmsprop_smoothing",
       number_field<double>("rmsprop_smoothing", NVX_REF(explorer.rmsprop_smoothing))},
      {"rmsprop_epsilon", number_field<double>("rmsprop_epsilon", NVX_REF(explorer.rmsprop_epsilon))},
  };
  return table;
}

#undef NVX_REF

const Field& field(const std::string& key) {
  for (const auto& [k, f] : fields()) {
    if (k == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

TaskKind RunConfig::task_kind() const {
  if (task == "fixed") return TaskKind::kFixed;
  if (task == "fixed-small") return TaskKind::kFixedSmall;
  if (task == "prim") return TaskKind::kPrim;
  if (task == "random") return TaskKind::kRandom;
  if (task == "continual") return TaskKind::kContinual;
  if (task == "noisy") return TaskKind::kNoisy;
  if (task.rfind("graph-", 0) == 0) return TaskKind::kGraph;
  throw ConfigError("unknown task '" + task + "'");
}

int RunConfig::graph_dim() const {
  if (task_kind() != TaskKind::kGraph) throw ConfigError("task '" + task + "' is not a graph task");
  const int dim = parse_number<int>("task", task.substr(6));
  if (dim < 2) throw ConfigError("graph observation dimension must be >= 2");
  return dim;
}

ConditionMode RunConfig::condition_mode() const { return parse_condition_mode(mode); }

int RunConfig::rows() const {
  if (maze_rows > 0) return maze_rows;
  switch (task_kind()) {
    case TaskKind::kFixedSmall: return 10;
    case TaskKind::kContinual: return 24;
    case TaskKind::kGraph: return 25;
    default: return 12;
  }
}

int RunConfig::cols() const {
  if (maze_cols > 0) return maze_cols;
  switch (task_kind()) {
    case TaskKind::kFixedSmall: return 10;
    case TaskKind::kContinual: return 24;
    case TaskKind::kGraph: return 25;
    default: return 12;
  }
}

std::uint64_t RunConfig::resolved_maze_seed() const {
  return maze_seed >= 0 ? static_cast<std::uint64_t>(maze_seed) : derive_seed(seed, 11);
}

void RunConfig::validate() const {
  const auto kind = task_kind();
  if (kind == TaskKind::kGraph) graph_dim();
  if (!random_baseline()) condition_mode();
  if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
  if (episode_length < 1) throw ConfigError("episode_length must be >= 1");
  if (!(step_scale > 0.0)) throw ConfigError("step_scale must be positive");
  if (rows() < 2 || cols() < 2) throw ConfigError("maze must be at least 2x2");
  if (!maze_file.empty() && kind != TaskKind::kFixed && kind != TaskKind::kFixedSmall) {
    throw ConfigError("maze_file only applies to the fixed tasks");
  }
  explorer.validate();
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  field(key).set(cfg, value);
}

RunConfig parse_run_config(const std::string& text, const RunConfig& base) {
  RunConfig cfg = base;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
    }
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.source = text;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string format_run_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, f] : fields()) out += key + " = " + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : format_run_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : fields()) keys.push_back(k);
  return keys;
}

}  // namespace novex
