#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace conceptpose {

struct Neighbor {
  int index = -1;
  double sq_dist = 0.0;
};

/// Exact 3D k-d tree. Ties on distance resolve to the lower point index,
/// so queries are deterministic.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Eigen::Vector3d> points, int leaf_size = 12);

  std::size_t size() const noexcept { return points_.size(); }
  const Eigen::Vector3d& point(int i) const { return points_[i]; }

  Neighbor nearest(const Eigen::Vector3d& query) const;

  /// The k closest points sorted by (distance, index). Pass `exclude` to
  /// skip one point index (the query point itself).
  void knn(const Eigen::Vector3d& query, int k, std::vector<Neighbor>& out,
           int exclude = -1) const;

 private:
  struct Node {
    int begin = 0;
    int end = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(int begin, int end, int leaf_size);
  void nearest_rec(int node, const Eigen::Vector3d& q, Neighbor& best) const;
  void knn_rec(int node, const Eigen::Vector3d& q, int k, int exclude,
               std::vector<Neighbor>& heap) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace conceptpose
