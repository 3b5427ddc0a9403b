#include "nnlogit/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>

namespace nnlogit {

namespace {

// (squared distance, index); lexicographic order implements the tie rule.
using Candidate = std::pair<double, std::size_t>;

void check_query(std::span<const double> query, std::size_t dim, std::size_t k, std::size_t n) {
  if (query.size() != dim) throw std::invalid_argument("k_nearest: query dimension mismatch");
  for (double v : query) {
    if (!std::isfinite(v)) throw std::invalid_argument("k_nearest: non-finite query");
  }
  if (k == 0) throw std::invalid_argument("k_nearest: k must be at least 1");
  if (k > n) throw std::invalid_argument("k_nearest: k exceeds the number of points");
}

NeighborSet finish(std::vector<Candidate> best) {
  std::sort(best.begin(), best.end());
  NeighborSet out;
  out.indices.reserve(best.size());
  out.distances.reserve(best.size());
  for (const auto& [d2, i] : best) {
    out.indices.push_back(i);
    out.distances.push_back(std::sqrt(d2));
  }
  out.bandwidth = out.distances.back();
  return out;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

NeighborIndex::NeighborIndex(RowMatrix points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (points_.rows() == 0 || points_.cols() == 0) {
    throw std::invalid_argument("NeighborIndex: empty point cloud");
  }
  if (!points_.allFinite()) throw std::invalid_argument("NeighborIndex: non-finite coordinates");
  order_.resize(size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * (size() / leaf_size_ + 1));
  build(0, size());
}

std::size_t NeighborIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  // Split on the dimension of largest spread.
  int best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t j = 0; j < dim(); ++j) {
    double lo = points_(order_[begin], j), hi = lo;
    for (std::size_t t = begin + 1; t < end; ++t) {
      const double v = points_(order_[t], j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<int>(j);
    }
  }
  if (best_spread <= 0.0) return id;  // all points identical: keep as a leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     return points_(a, best_dim) < points_(b, best_dim);
                   });
  const double split = points_(order_[mid], best_dim);

  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].split_dim = best_dim;
  nodes_[id].split_value = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

// Depth-first search with a bounded max-heap of candidates.
class KdSearch {
 public:
  KdSearch(const NeighborIndex& index, std::span<const double> query, std::size_t k)
      : index_(index), query_(query), k_(k) {}

  std::vector<Candidate> run() {
    visit(0);
    std::vector<Candidate> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    return out;
  }

 private:
  void offer(const Candidate& c) {
    if (heap_.size() < k_) {
      heap_.push(c);
    } else if (c < heap_.top()) {
      heap_.pop();
      heap_.push(c);
    }
  }

  void visit(std::size_t node_id) {
    const auto& node = index_.nodes_[node_id];
    if (node.split_dim < 0) {
      for (std::size_t t = node.begin; t < node.end; ++t) {
        const std::size_t i = index_.order_[t];
        offer({squared_distance(query_, index_.point(i)), i});
      }
      return;
    }
    const double diff = query_[static_cast<std::size_t>(node.split_dim)] - node.split_value;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    visit(near);
    // Equality must still be explored: a tied point with a smaller index may win.
    if (heap_.size() < k_ || diff * diff <= heap_.top().first) visit(far);
  }

  const NeighborIndex& index_;
  std::span<const double> query_;
  std::size_t k_;
  std::priority_queue<Candidate> heap_;
};

NeighborSet NeighborIndex::k_nearest(std::span<const double> query, std::size_t k) const {
  check_query(query, dim(), k, size());
  return finish(KdSearch(*this, query, k).run());
}

NeighborIndex build_index(const RowMatrix& cloud) { return NeighborIndex(cloud); }

NeighborSet brute_force_k_nearest(const RowMatrix& points, std::span<const double> query,
                                  std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto p = static_cast<std::size_t>(points.cols());
  check_query(query, p, k, n);
  std::vector<Candidate> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    all[i] = {squared_distance(query, {points.data() + i * p, p}), i};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return finish(std::move(all));
}

double unit_ball_volume(std::size_t p) {
  const double half = static_cast<double>(p) / 2.0;
  return std::exp(half * std::log(std::numbers::pi) - std::lgamma(half + 1.0));
}

double theoretical_bandwidth(std::size_t k, std::size_t n, std::size_t p, double density) {
  if (k == 0 || n == 0 || p == 0 || !(density > 0.0)) {
    throw std::invalid_argument("theoretical_bandwidth: arguments must be positive");
  }
  const double ratio = static_cast<double>(k) / static_cast<double>(n);
  return std::pow(ratio / (density * unit_ball_volume(p)), 1.0 / static_cast<double>(p));
}

}  // namespace nnlogit
