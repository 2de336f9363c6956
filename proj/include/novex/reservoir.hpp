#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace novex {

/// Fixed random echo state network: h' = tanh(W_in u + W h).
/// Immutable after construction.
struct EsnParams {
  Eigen::MatrixXd input_weights;                // size x input_dim, dense uniform +-1
  Eigen::SparseMatrix<double> recurrent;        // size x size, sparse
  double spectral_radius = 0.0;                 // target the recurrent matrix was scaled to
  double connectivity = 0.0;                    // fraction of nonzero recurrent weights
  std::uint64_t seed = 0;

  Eigen::Index size() const { return input_weights.rows(); }
  Eigen::Index input_dim() const { return input_weights.cols(); }
};

struct EsnState {
  Eigen::VectorXd hidden;
  std::uint64_t steps = 0;

  static EsnState zeros(Eigen::Index size) { return {Eigen::VectorXd::Zero(size), 0}; }
};

/// Largest eigenvalue modulus of a dense square matrix.
double spectral_radius(const Eigen::MatrixXd& m);

/// Builds a reservoir whose recurrent matrix has `connectivity` nonzero fraction and
/// spectral radius equal to `spectral_radius`. Degenerate draws are reseeded a bounded
/// number of times before throwing ConfigError.
EsnParams esn_init(Eigen::Index input_dim, Eigen::Index size, double spectral_radius,
                   double connectivity, std::uint64_t seed);

EsnState esn_step(const EsnParams& params, const EsnState& state, const Eigen::VectorXd& input);

/// Deterministic state trajectory; element i is the state after consuming inputs[i].
std::vector<EsnState> esn_replay(const EsnParams& params, const EsnState& initial,
                                 const std::vector<Eigen::VectorXd>& inputs);

/// Same as esn_replay over the columns of `inputs`, returning hidden states as columns.
Eigen::MatrixXd esn_replay_matrix(const EsnParams& params, const Eigen::VectorXd& initial,
                                  const Eigen::MatrixXd& inputs);

}  // namespace novex
