#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "novex/points.hpp"

namespace novex {

/// k-th smallest squared Euclidean distance (1-indexed) from x to refs. When refs holds
/// fewer than k points, the largest available distance. nullopt for an empty set.
std::optional<double> knn_negdensity(std::span<const double> x, const PointSet& refs,
                                     std::size_t k);

/// Same quantity over points carrying integer multiplicities.
std::optional<double> knn_negdensity(std::span<const double> x, const PointSet& refs,
                                     std::span<const std::uint32_t> counts, std::size_t k);

/// Exact k-nearest-neighbour index (k-d tree) over points with multiplicities.
class KnnIndex {
 public:
  KnnIndex() = default;
  /// `counts` empty means multiplicity one for every point.
  explicit KnnIndex(PointSet points, std::vector<std::uint32_t> counts = {});

  std::size_t size() const { return points_.size(); }
  std::uint64_t total_count() const { return total_; }

  /// Equals knn_negdensity over the same multiset, exactly.
  std::optional<double> kth(std::span<const double> x, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_
    std::int32_t left = -1, right = -1;
    std::vector<double> lo, hi;        // bounding box
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  PointSet points_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::uint64_t total_ = 0;
};

/// Append-only record of online negative densities with a monotone running maximum.
class DensityLedger {
 public:
  /// Records d and returns its normalized value d / max(D) (including d).
  double append(double d);
  /// First step with no reference memory: stores 0 and reports maximal novelty.
  double append_default();

  double running_max() const { return max_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
  double max_ = 0.0;
};

/// d / running max, clamped to [0, 1]; 1.0 when the ledger holds no positive value.
double normalize_density(double d, const DensityLedger& ledger);
double normalize_density(double d, double running_max);

std::size_t density_bin(double d_norm, std::size_t n_bins);
/// One-hot of length n_bins with bin min(floor(d_norm * n_bins), n_bins - 1) set.
Eigen::VectorXd bin_embedding(double d_norm, std::size_t n_bins);

/// Negative density of every point in X against X itself with the self-distance
/// excluded (the (k+1)-th neighbour). nullopt where the point has no other neighbour.
std::vector<std::optional<double>> offline_goals(const PointSet& X, std::size_t k);

/// All observations in arrival order plus a deduplicated view with multiplicities.
class ObservationMemory {
 public:
  explicit ObservationMemory(std::size_t dim) : all_(dim), unique_(dim) {}

  void add(std::span<const double> x);
  /// Online query against everything stored so far.
  std::optional<double> negdensity(std::span<const double> x, std::size_t k) const;
  /// Number of stored copies of exactly x.
  std::uint32_t count(std::span<const double> x) const;

  const PointSet& all() const { return all_; }
  const PointSet& unique() const { return unique_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }
  std::size_t dim() const { return all_.dim(); }

 private:
  PointSet all_;
  PointSet unique_;
  std::vector<std::uint32_t> counts_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

}  // namespace novex
