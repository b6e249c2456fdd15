#include <conceptpose/kdtree.hpp>

#include <algorithm>
#include <limits>

namespace conceptpose {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Eigen::Vector3d> points, int leaf_size)
    : points_(points.begin(), points.end()), order_(points.size()) {
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / std::max(1, leaf_size) + 1);
    build(0, static_cast<int>(points_.size()), std::max(1, leaf_size));
  }
}

int KdTree::build(int begin, int end, int leaf_size) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= leaf_size) return id;

  Eigen::Vector3d lo = points_[order_[begin]];
  Eigen::Vector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid, leaf_size);
  const int right = build(mid, end, leaf_size);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

Neighbor KdTree::nearest(const Eigen::Vector3d& query) const {
  Neighbor best{-1, std::numeric_limits<double>::infinity()};
  if (!nodes_.empty()) nearest_rec(0, query, best);
  return best;
}

void KdTree::nearest_rec(int id, const Eigen::Vector3d& q, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
      if (closer(cand, best)) best = cand;
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  nearest_rec(near, q, best);
  if (diff * diff <= best.sq_dist) nearest_rec(far, q, best);
}

void KdTree::knn(const Eigen::Vector3d& query, int k, std::vector<Neighbor>& out,
                 int exclude) const {
  out.clear();
  if (k <= 0 || nodes_.empty()) return;
  out.reserve(k + 1);
  knn_rec(0, query, k, exclude, out);
  std::sort_heap(out.begin(), out.end(), closer);
}

void KdTree::knn_rec(int id, const Eigen::Vector3d& q, int k, int exclude,
                     std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      if (idx == exclude) continue;
      const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  knn_rec(near, q, k, exclude, heap);
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().sq_dist) {
    knn_rec(far, q, k, exclude, heap);
  }
}

}  // namespace conceptpose
