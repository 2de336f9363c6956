// Command-line front end: run, sweep, deploy, summarize, export-maze.

#include <malloc.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "novex/config.hpp"
#include "novex/errors.hpp"
#include "novex/experiment.hpp"

namespace fs = std::filesystem;
using novex::RunConfig;

namespace {

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto s = std::stoull(text);
      return {s, s};
    }
    const auto a = std::stoull(text.substr(0, dots));
    const auto b = std::stoull(text.substr(dots + 2));
    if (b < a) throw novex::ConfigError("seed range '" + text + "' is empty");
    return {a, b};
  } catch (const std::logic_error&) {
    throw novex::ConfigError("cannot parse seed range '" + text + "' (expected A..B)");
  }
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      bool trace) {
  RunConfig cfg = novex::load_run_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw novex::ConfigError("--set expects key=value, got '" + kv + "'");
    novex::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (trace) cfg.trace = true;
  if (!overrides.empty()) {
    cfg.source += "\n# command-line overrides\n";
    for (const auto& kv : overrides) cfg.source += kv + "\n";
  }
  cfg.validate();
  return cfg;
}

// A sweep directory resolves to the model of its best-scoring seed.
fs::path resolve_model(const fs::path& path) {
  if (fs::exists(path / "manifest.txt") && fs::exists(path / "model")) return path / "model";
  if (!fs::exists(path / "scores.csv")) return path;
  std::ifstream in(path / "scores.csv");
  std::string line;
  std::getline(in, line);
  std::string best_seed;
  double best = -1.0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const double score = std::stod(line.substr(comma + 1));
    if (score > best) {
      best = score;
      best_seed = line.substr(0, comma);
    }
  }
  if (best_seed.empty()) throw novex::ConfigError("no scored runs in " + path.string());
  std::cout << "using seed " << best_seed << " (score " << best << ") from " << path << "\n";
  return path / ("seed_" + best_seed) / "model";
}

std::string format_scores(const std::vector<double>& scores) {
  std::string out;
  for (double s : scores) out += (out.empty() ? "" : " ") + std::to_string(s);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // Training allocates many same-sized temporaries; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);

  CLI::App app{"novex: memory-density exploration agents in mazes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds = "0..0";
  std::uint64_t seed = 0;
  int workers = 1;
  bool trace = false;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run one seed of a configuration");
  run->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  auto* run_seed = run->add_option("--seed", seed, "Override the configured seed");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--trace", trace, "Write the per-step trace");
  run->add_option("--set", overrides, "Override a configuration key (key=value)");

  auto* sweep = app.add_subcommand("sweep", "Run a range of seeds and summarize them");
  sweep->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seeds", seeds, "Seed range A..B")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_flag("--trace", trace, "Write per-step traces");
  sweep->add_option("--set", overrides, "Override a configuration key (key=value)");

  std::string snapshot;
  auto* deploy = app.add_subcommand("deploy", "Run a saved model frozen on a new maze, plus an untrained control");
  deploy->add_option("--snapshot", snapshot, "Model directory, run directory or sweep directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  deploy->add_option("--config", config_path, "Configuration of the new maze")->required()->check(CLI::ExistingFile);
  deploy->add_option("--seeds", seeds, "Seed range A..B");
  deploy->add_option("--out", out_dir, "Output directory")->required();
  deploy->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  deploy->add_flag("--trace", trace, "Write per-step traces");
  deploy->add_option("--set", overrides, "Override a configuration key (key=value)");

  std::vector<std::string> dirs;
  double threshold = 0.15;
  auto* summarize = app.add_subcommand("summarize", "Tabulate top, bottom and median scores per condition");
  summarize->add_option("dirs", dirs, "One directory of runs per condition")->required()->check(CLI::ExistingDirectory);
  summarize->add_option("--out", out_dir, "Write summary.csv and per-condition curves here");
  summarize->add_option("--threshold", threshold, "Pathology threshold for bottom scores");

  auto* export_maze = app.add_subcommand("export-maze", "Write a task's maze layout or transition table");
  export_maze->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  auto* export_seed = export_maze->add_option("--seed", seed, "Override the configured seed");
  export_maze->add_option("--out", out_dir, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = load_config(config_path, overrides, trace);
      if (*run_seed) cfg.seed = seed;
      novex::RunOptions opts;
      opts.out_dir = out_dir;
      const auto result = novex::run_experiment(cfg, std::move(opts));
      std::cout << "episodes " << result.episodes.size() << " score " << result.score << "\n";
      if (result.failed) {
        std::cerr << "run failed: " << result.failure << "\n";
        return 2;
      }
    } else if (*sweep) {
      const auto cfg = load_config(config_path, overrides, trace);
      const auto [a, b] = parse_seed_range(seeds);
      const auto scores = novex::run_sweep(cfg, a, b, workers, out_dir);
      std::cout << novex::format_summary_table({novex::summarize_scores(cfg.task + "/" + cfg.mode, scores)});
    } else if (*deploy) {
      const auto cfg = load_config(config_path, overrides, trace);
      const auto [a, b] = parse_seed_range(seeds);
      const auto result = novex::run_deploy(resolve_model(snapshot), cfg, a, b, workers, out_dir);
      std::cout << "pretrained median " << novex::median(result.pretrained) << " ["
                << format_scores(result.pretrained) << "]\n"
                << "untrained  median " << novex::median(result.untrained) << " ["
                << format_scores(result.untrained) << "]\n";
    } else if (*summarize) {
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      const auto table = novex::format_summary_table(novex::summarize_runs(paths, threshold));
      std::cout << table;
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "summary.csv") << table;
        for (const auto& dir : paths) {
          std::vector<std::vector<novex::EpisodeRow>> logs;
          std::uint64_t interval = 0;
          std::uint64_t total = 0;
          for (const auto& entry : fs::directory_iterator(dir)) {
            if (!fs::exists(entry.path() / "episodes.csv")) continue;
            const auto cfg = novex::load_run_config(entry.path() / "manifest.txt");
            interval = static_cast<std::uint64_t>(cfg.episode_length);
            total = std::max(total, cfg.total_steps);
            logs.push_back(novex::read_episode_log(entry.path() / "episodes.csv"));
          }
          if (logs.empty()) continue;
          std::ofstream f(fs::path(out_dir) / ("curve_" + dir.filename().string() + ".csv"));
          f << "step,median,min,max\n";
          for (const auto& p : novex::coverage_curve(logs, interval, total)) {
            f << p.step << "," << p.median << "," << p.min << "," << p.max << "\n";
          }
        }
      }
    } else if (*export_maze) {
      auto cfg = novex::load_run_config(config_path);
      if (*export_seed) cfg.seed = seed;
      novex::export_task_maze(cfg, out_dir);
    }
  } catch (const novex::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
