#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "novex/errors.hpp"

namespace novex {

/// Squared Euclidean distance, summed in index order.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

/// Row-major set of fixed-dimension points.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  void push_back(std::span<const double> p) {
    if (p.size() != dim_) {
      throw ConfigError("PointSet: point dimension " + std::to_string(p.size()) +
                        " != " + std::to_string(dim_));
    }
    data_.insert(data_.end(), p.begin(), p.end());
  }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> mutable_point(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  void erase(std::size_t i) {
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
  }
  void clear() { data_.clear(); }
  void reserve(std::size_t n) { data_.reserve(n * dim_); }

  const std::vector<double>& raw() const { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace novex
