#include "novex/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <Eigen/Eigenvalues>

#include "novex/errors.hpp"
#include "novex/random.hpp"

namespace novex {

namespace {

constexpr int kMaxReseeds = 16;

// Floyd's algorithm: `count` distinct values from [0, n), returned sorted.
std::vector<std::uint64_t> distinct_indices(std::uint64_t n, std::uint64_t count, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  for (std::uint64_t j = n - count; j < n; ++j) {
    const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw ConfigError("eigenvalue solver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

EsnParams esn_init(Eigen::Index input_dim, Eigen::Index size, double target_radius,
                   double connectivity, std::uint64_t seed) {
  if (size < 1) throw ConfigError("esn_init: size must be >= 1");
  if (input_dim < 1) throw ConfigError("esn_init: input_dim must be >= 1");
  if (!(connectivity > 0.0 && connectivity <= 1.0)) {
    throw ConfigError("esn_init: connectivity must lie in (0, 1]");
  }
  if (!(target_radius > 0.0)) throw ConfigError("esn_init: spectral radius must be positive");

  const auto n = static_cast<std::uint64_t>(size);
  const auto total = n * n;
  const auto nonzeros = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(connectivity * static_cast<double>(total))));

  for (int attempt = 0; attempt < kMaxReseeds; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    EsnParams p;
    p.seed = seed;
    p.connectivity = connectivity;
    p.spectral_radius = target_radius;
    p.input_weights.resize(size, input_dim);
    for (Eigen::Index r = 0; r < size; ++r) {
      for (Eigen::Index c = 0; c < input_dim; ++c) p.input_weights(r, c) = uniform(rng, -1.0, 1.0);
    }

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(size, size);
    for (const auto idx : distinct_indices(total, nonzeros, rng)) {
      dense(static_cast<Eigen::Index>(idx / n), static_cast<Eigen::Index>(idx % n)) =
          uniform(rng, -1.0, 1.0);
    }
    const double rho = spectral_radius(dense);
    if (!(rho > 1e-12) || !std::isfinite(rho)) continue;  // nilpotent draw, try another
    dense *= target_radius / rho;
    p.recurrent = dense.sparseView(0.0, 0.0);
    p.recurrent.makeCompressed();
    return p;
  }
  throw ConfigError("esn_init: could not draw a non-degenerate reservoir");
}

namespace {

// Single code path for online stepping and replay so both are bit-identical.
void advance(const EsnParams& params, const Eigen::VectorXd& hidden, const Eigen::VectorXd& input,
             Eigen::VectorXd& out) {
  Eigen::VectorXd pre = params.input_weights * input;
  pre += params.recurrent * hidden;
  out = pre.array().tanh().matrix();
}

}  // namespace

EsnState esn_step(const EsnParams& params, const EsnState& state, const Eigen::VectorXd& input) {
  if (input.size() != params.input_dim()) {
    throw ConfigError("esn_step: input dim " + std::to_string(input.size()) +
                      " != " + std::to_string(params.input_dim()));
  }
  EsnState next;
  advance(params, state.hidden, input, next.hidden);
  next.steps = state.steps + 1;
  return next;
}

std::vector<EsnState> esn_replay(const EsnParams& params, const EsnState& initial,
                                 const std::vector<Eigen::VectorXd>& inputs) {
  std::vector<EsnState> out;
  out.reserve(inputs.size());
  EsnState s = initial;
  for (const auto& u : inputs) {
    s = esn_step(params, s, u);
    out.push_back(s);
  }
  return out;
}

Eigen::MatrixXd esn_replay_matrix(const EsnParams& params, const Eigen::VectorXd& initial,
                                  const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != params.input_dim()) throw ConfigError("esn_replay: input dim mismatch");
  Eigen::MatrixXd states(params.size(), inputs.cols());
  Eigen::VectorXd h = initial;
  Eigen::VectorXd u(inputs.rows());
  Eigen::VectorXd next(params.size());
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    u = inputs.col(t);
    advance(params, h, u, next);
    h = next;
    states.col(t) = h;
  }
  return states;
}

}  // namespace novex
