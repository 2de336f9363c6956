#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "novex/config.hpp"
#include "novex/density.hpp"
#include "novex/errors.hpp"
#include "novex/experiment.hpp"
#include "novex/graph_maze.hpp"
#include "novex/maze.hpp"
#include "novex/version.hpp"

namespace py = pybind11;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

novex::RunConfig make_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  auto cfg = novex::parse_run_config(text);
  for (const auto& [key, value] : overrides) novex::set_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

py::dict episode_dict(const novex::EpisodeRow& r) {
  py::dict d;
  d["episode"] = r.episode;
  d["total_steps"] = r.total_steps;
  d["coverage"] = r.coverage;
  d["episode_coverage"] = r.episode_coverage;
  d["goal_density"] = r.goal_density;
  d["record"] = r.record;
  d["epsilon"] = r.epsilon;
  d["mean_loss"] = r.mean_loss;
  d["replay_steps"] = r.replay_steps;
  d["goal_episodes"] = r.goal_episodes;
  d["centroids"] = r.centroids;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reservoir explorer core";
  m.attr("__version__") = novex::kVersion;

  py::register_exception<novex::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<novex::DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  m.def("config_keys", &novex::config_keys);
  m.def(
      "normalize_config",
      [](const std::string& text, const std::map<std::string, std::string>& overrides) {
        return novex::format_run_config(make_config(text, overrides));
      },
      py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Every key with its resolved value.");
  m.def(
      "config_hash",
      [](const std::string& text, const std::map<std::string, std::string>& overrides) {
        return novex::config_hash(make_config(text, overrides));
      },
      py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "run",
      [](const std::string& text, const std::map<std::string, std::string>& overrides,
         const std::string& out_dir) {
        const auto cfg = make_config(text, overrides);
        novex::RunOptions options;
        options.out_dir = out_dir;
        options.save_model = !out_dir.empty();
        novex::RunResult result;
        {
          py::gil_scoped_release release;
          result = novex::run_experiment(cfg, std::move(options));
        }
        py::dict d;
        d["score"] = result.score;
        d["failed"] = result.failed;
        d["failure"] = result.failure;
        py::list episodes;
        for (const auto& r : result.episodes) episodes.append(episode_dict(r));
        d["episodes"] = episodes;
        return d;
      },
      py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("out_dir") = "", "One training run; returns the score and the episode log.");
  m.def(
      "sweep",
      [](const std::string& text, std::uint64_t first, std::uint64_t last, int workers,
         const std::string& out_dir, const std::map<std::string, std::string>& overrides) {
        const auto cfg = make_config(text, overrides);
        py::gil_scoped_release release;
        return novex::run_sweep(cfg, first, last, workers, out_dir);
      },
      py::arg("text"), py::arg("first"), py::arg("last"), py::arg("workers") = 1,
      py::arg("out_dir"), py::arg("overrides") = std::map<std::string, std::string>{});
  m.def(
      "summarize",
      [](const std::vector<std::filesystem::path>& dirs, double threshold) {
        return novex::format_summary_table(novex::summarize_runs(dirs, threshold));
      },
      py::arg("dirs"), py::arg("threshold") = 0.15);
  m.def(
      "read_episode_log",
      [](const std::filesystem::path& path) {
        py::list out;
        for (const auto& r : novex::read_episode_log(path)) out.append(episode_dict(r));
        return out;
      },
      py::arg("path"));

  m.def(
      "knn_negdensity",
      [](const Eigen::VectorXd& x, const RowMatrix& refs, std::size_t k) -> std::optional<double> {
        if (refs.cols() != x.size()) throw novex::ConfigError("refs must have one column per coordinate");
        novex::PointSet set(static_cast<std::size_t>(refs.cols()));
        for (Eigen::Index i = 0; i < refs.rows(); ++i) {
          set.push_back(std::span<const double>(refs.row(i).data(), static_cast<std::size_t>(refs.cols())));
        }
        return novex::knn_negdensity(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                                     set, k);
      },
      py::arg("x"), py::arg("refs"), py::arg("k"),
      "k-th smallest squared distance from x to the rows of refs.");

  m.def(
      "prim_maze",
      [](int rows, int cols, std::uint64_t seed) {
        return novex::maze::format_maze(novex::maze::maze_random_prim(rows, cols, seed));
      },
      py::arg("rows"), py::arg("cols"), py::arg("seed"), "Maze text, one hex wall digit per cell.");
  m.def(
      "wilson_maze",
      [](int rows, int cols, std::uint64_t seed) { return novex::graph::wilson_maze(rows, cols, seed).edges; },
      py::arg("rows"), py::arg("cols"), py::arg("seed"),
      "Spanning-tree edges as (lower, higher) row-major cell ids.");
  m.def(
      "export_maze",
      [](const std::string& text, const std::filesystem::path& path,
         const std::map<std::string, std::string>& overrides) {
        novex::export_task_maze(make_config(text, overrides), path);
      },
      py::arg("text"), py::arg("path"), py::arg("overrides") = std::map<std::string, std::string>{});
}
