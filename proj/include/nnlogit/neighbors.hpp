#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nnlogit/types.hpp"

namespace nnlogit {

/// The k nearest points to a query, closest first.
///
/// Ties in distance are broken by the smaller point index, so the set is
/// well defined on data with repeated values.
struct NeighborSet {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
  /// Distance of the k-th neighbor (the empirical k-NN radius).
  double bandwidth = 0.0;

  std::size_t size() const { return indices.size(); }
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Exact Euclidean k-NN index (k-d tree). Immutable after construction and
/// safe for concurrent queries.
class NeighborIndex {
 public:
  explicit NeighborIndex(RowMatrix points, std::size_t leaf_size = 16);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  const RowMatrix& points() const { return points_; }

  /// Throws std::invalid_argument if k is 0 or exceeds size(), or the query
  /// is non-finite or of the wrong dimension.
  NeighborSet k_nearest(std::span<const double> query, std::size_t k) const;

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    int split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim(), dim()};
  }

  RowMatrix points_;
  std::size_t leaf_size_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;

  friend class KdSearch;
};

NeighborIndex build_index(const RowMatrix& cloud);

/// Linear scan over all points; serial reference for NeighborIndex.
NeighborSet brute_force_k_nearest(const RowMatrix& points, std::span<const double> query,
                                  std::size_t k);

/// Radius ((k/n) / (f V_p))^(1/p) of the ball expected to hold k of n points
/// around a location of density f; V_p is the unit-ball volume.
double theoretical_bandwidth(std::size_t k, std::size_t n, std::size_t p, double density);

double unit_ball_volume(std::size_t p);

}  // namespace nnlogit
