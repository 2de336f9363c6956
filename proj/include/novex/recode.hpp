#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "novex/points.hpp"
#include "novex/random.hpp"

namespace novex {

struct RecodeParams {
  double kappa = 0.2;                 // insertion distance threshold, observation units
  double decay = 0.9999;              // per-update weight decay
  double insertion_probability = 0.1;
  double discount = 1.0;              // kept for configuration parity; the update does not use it
  std::size_t capacity = 6000;
};

/// Streaming clustering memory: centroids with decaying visit mass.
struct CentroidBuffer {
  PointSet positions;
  std::vector<double> weights;

  explicit CentroidBuffer(std::size_t dim = 0) : positions(dim) {}
  std::size_t size() const { return weights.size(); }
  bool empty() const { return weights.empty(); }
};

struct NearestCentroid {
  std::size_t index = 0;
  double distance = 0.0;  // Euclidean, not squared
};

/// Closest centroid, ties to the lowest index; nullopt for an empty buffer.
std::optional<NearestCentroid> nearest_centroid(const CentroidBuffer& buffer,
                                                std::span<const double> x);

/// Decay all weights, then insert x as a new centroid (probabilistically, when farther
/// than kappa from every centroid; always when empty) or merge it into the nearest one.
/// A full buffer evicts its lightest centroid before inserting.
void recode_update(CentroidBuffer& buffer, std::span<const double> x, const RecodeParams& params,
                   Rng& rng);

/// CSV dump: one row per centroid, columns c0..c{dim-1},weight.
void write_centroids(const CentroidBuffer& buffer, const std::filesystem::path& path);

}  // namespace novex
