#include "novex/recode.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "novex/errors.hpp"

namespace novex {

std::optional<NearestCentroid> nearest_centroid(const CentroidBuffer& buffer,
                                                std::span<const double> x) {
  if (buffer.empty()) return std::nullopt;
  NearestCentroid best{0, std::numeric_limits<double>::infinity()};
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const double d = squared_distance(x, buffer.positions[i]);
    if (d < best_sq) {
      best_sq = d;
      best.index = i;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

void recode_update(CentroidBuffer& buffer, std::span<const double> x, const RecodeParams& params,
                   Rng& rng) {
  if (params.capacity < 1) throw ConfigError("recode: capacity must be >= 1");
  if (buffer.positions.dim() != x.size()) throw ConfigError("recode: dimension mismatch");

  for (auto& w : buffer.weights) w *= params.decay;

  const auto nearest = nearest_centroid(buffer, x);
  const bool insert =
      !nearest || (nearest->distance > params.kappa && bernoulli(rng, params.insertion_probability));
  if (insert) {
    if (buffer.size() >= params.capacity) {
      std::size_t lightest = 0;
      for (std::size_t i = 1; i < buffer.size(); ++i) {
        if (buffer.weights[i] < buffer.weights[lightest]) lightest = i;
      }
      buffer.positions.erase(lightest);
      buffer.weights.erase(buffer.weights.begin() + static_cast<std::ptrdiff_t>(lightest));
    }
    buffer.positions.push_back(x);
    buffer.weights.push_back(1.0);
    return;
  }

  auto c = buffer.positions.mutable_point(nearest->index);
  double& w = buffer.weights[nearest->index];
  const double step = 1.0 / (w + 1.0);
  for (std::size_t d = 0; d < c.size(); ++d) c[d] += step * (x[d] - c[d]);
  w += 1.0;
}

void write_centroids(const CentroidBuffer& buffer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  const std::size_t dim = buffer.positions.dim();
  for (std::size_t d = 0; d < dim; ++d) out << 'c' << d << ',';
  out << "weight\n" << std::setprecision(17);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    for (const double v : buffer.positions[i]) out << v << ',';
    out << buffer.weights[i] << '\n';
  }
}

}  // namespace novex
