#include "novex/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <queue>

namespace novex {

namespace {

// Tracks the k-th smallest value of a stream of (distance, multiplicity) pairs.
class KthAccumulator {
 public:
  explicit KthAccumulator(std::size_t k) : k_(k) {}

  void offer(double d, std::uint32_t count) {
    if (total_ >= k_ && d >= heap_.top().first) return;
    heap_.emplace(d, count);
    total_ += count;
    while (total_ - heap_.top().second >= k_) {
      total_ -= heap_.top().second;
      heap_.pop();
    }
  }

  double bound() const {
    return total_ >= k_ ? heap_.top().first : std::numeric_limits<double>::infinity();
  }

  std::optional<double> result() const {
    if (heap_.empty()) return std::nullopt;
    return heap_.top().first;
  }

 private:
  std::size_t k_;
  std::uint64_t total_ = 0;
  std::priority_queue<std::pair<double, std::uint32_t>> heap_;
};

std::string key_of(std::span<const double> x) {
  std::string key(x.size() * sizeof(double), '\0');
  std::memcpy(key.data(), x.data(), key.size());
  return key;
}

void require_k(std::size_t k) {
  if (k < 1) throw ConfigError("density: k must be >= 1");
}

}  // namespace

std::optional<double> knn_negdensity(std::span<const double> x, const PointSet& refs,
                                     std::size_t k) {
  require_k(k);
  KthAccumulator acc(k);
  for (std::size_t i = 0; i < refs.size(); ++i) acc.offer(squared_distance(x, refs[i]), 1);
  return acc.result();
}

std::optional<double> knn_negdensity(std::span<const double> x, const PointSet& refs,
                                     std::span<const std::uint32_t> counts, std::size_t k) {
  require_k(k);
  KthAccumulator acc(k);
  for (std::size_t i = 0; i < refs.size(); ++i) acc.offer(squared_distance(x, refs[i]), counts[i]);
  return acc.result();
}

KnnIndex::KnnIndex(PointSet points, std::vector<std::uint32_t> counts)
    : points_(std::move(points)), counts_(std::move(counts)) {
  if (counts_.empty()) counts_.assign(points_.size(), 1);
  if (counts_.size() != points_.size()) throw ConfigError("KnnIndex: counts size mismatch");
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KnnIndex::build(std::uint32_t begin, std::uint32_t end) {
  constexpr std::uint32_t kLeafSize = 8;
  const std::size_t dim = points_.dim();
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo.assign(dim, std::numeric_limits<double>::infinity());
  node.hi.assign(dim, -std::numeric_limits<double>::infinity());
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto p = points_[order_[i]];
    for (std::size_t d = 0; d < dim; ++d) {
      node.lo[d] = std::min(node.lo[d], p[d]);
      node.hi[d] = std::max(node.hi[d], p[d]);
    }
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  std::size_t split = 0;
  double widest = -1.0;
  for (std::size_t d = 0; d < dim; ++d) {
    if (node.hi[d] - node.lo[d] > widest) {
      widest = node.hi[d] - node.lo[d];
      split = d;
    }
  }
  if (widest <= 0.0) return id;  // all points identical

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][split] < points_[b][split];
                   });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::optional<double> KnnIndex::kth(std::span<const double> x, std::size_t k) const {
  require_k(k);
  if (nodes_.empty()) return std::nullopt;
  if (x.size() != points_.dim()) throw ConfigError("KnnIndex: query dimension mismatch");
  KthAccumulator acc(k);

  auto box_distance = [&](const Node& n) {
    double sum = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      double gap = 0.0;
      if (x[d] < n.lo[d]) gap = n.lo[d] - x[d];
      else if (x[d] > n.hi[d]) gap = x[d] - n.hi[d];
      sum += gap * gap;
    }
    return sum;
  };

  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (box_distance(n) > acc.bound()) continue;
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const auto idx = order_[i];
        acc.offer(squared_distance(x, points_[idx]), counts_[idx]);
      }
      continue;
    }
    // Visit the nearer child first so the bound tightens early.
    const Node& l = nodes_[static_cast<std::size_t>(n.left)];
    const Node& r = nodes_[static_cast<std::size_t>(n.right)];
    if (box_distance(l) <= box_distance(r)) {
      stack.push_back(n.right);
      stack.push_back(n.left);
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  return acc.result();
}

double DensityLedger::append(double d) {
  values_.push_back(d);
  max_ = std::max(max_, d);
  return normalize_density(d, max_);
}

double DensityLedger::append_default() {
  values_.push_back(0.0);
  return 1.0;
}

double normalize_density(double d, double running_max) {
  if (!(running_max > 0.0)) return 1.0;
  return std::clamp(d / running_max, 0.0, 1.0);
}

double normalize_density(double d, const DensityLedger& ledger) {
  return normalize_density(d, ledger.running_max());
}

std::size_t density_bin(double d_norm, std::size_t n_bins) {
  if (n_bins == 0) throw ConfigError("density bins must be >= 1");
  const double clamped = std::clamp(d_norm, 0.0, 1.0);
  return std::min(static_cast<std::size_t>(std::floor(clamped * static_cast<double>(n_bins))),
                  n_bins - 1);
}

Eigen::VectorXd bin_embedding(double d_norm, std::size_t n_bins) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_bins));
  v(static_cast<Eigen::Index>(density_bin(d_norm, n_bins))) = 1.0;
  return v;
}

std::vector<std::optional<double>> offline_goals(const PointSet& X, std::size_t k) {
  require_k(k);
  ObservationMemory memory(X.dim());
  for (std::size_t i = 0; i < X.size(); ++i) memory.add(X[i]);
  const KnnIndex index(memory.unique(), memory.counts());

  std::vector<std::optional<double>> per_unique(memory.unique().size());
  for (std::size_t u = 0; u < memory.unique().size(); ++u) {
    if (index.total_count() <= 1) continue;  // the point is its own only neighbour
    per_unique[u] = index.kth(memory.unique()[u], k + 1);
  }
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t u = 0; u < memory.unique().size(); ++u) slot[key_of(memory.unique()[u])] = u;

  std::vector<std::optional<double>> out(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) out[i] = per_unique[slot.at(key_of(X[i]))];
  return out;
}

void ObservationMemory::add(std::span<const double> x) {
  all_.push_back(x);
  auto [it, inserted] = lookup_.try_emplace(key_of(x), static_cast<std::uint32_t>(unique_.size()));
  if (inserted) {
    unique_.push_back(x);
    counts_.push_back(1);
  } else {
    ++counts_[it->second];
  }
}

std::optional<double> ObservationMemory::negdensity(std::span<const double> x,
                                                    std::size_t k) const {
  return knn_negdensity(x, unique_, counts_, k);
}

std::uint32_t ObservationMemory::count(std::span<const double> x) const {
  const auto it = lookup_.find(key_of(x));
  return it == lookup_.end() ? 0 : counts_[it->second];
}

}  // namespace novex
