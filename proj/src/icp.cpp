#include <conceptpose/pose_solver.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/kdtree.hpp>

#include <cmath>

namespace conceptpose {

namespace {

struct Matching {
  std::vector<Eigen::Vector3d> anchor;
  std::vector<Eigen::Vector3d> query;
  double rmse = 0.0;
};

Matching match_nearest(const RigidTransform& t, std::span<const Eigen::Vector3d> anchor_cloud,
                       const KdTree& query_tree, double rejection, Execution exec) {
  const auto n = static_cast<std::ptrdiff_t>(anchor_cloud.size());
  std::vector<Neighbor> nn(anchor_cloud.size());
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) nn[i] = query_tree.nearest(t(anchor_cloud[i]));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) nn[i] = query_tree.nearest(t(anchor_cloud[i]));
  }

  Matching m;
  const double sq_rejection = rejection * rejection;
  double sq_sum = 0.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (nn[i].index < 0 || !(nn[i].sq_dist < sq_rejection)) continue;
    m.anchor.push_back(anchor_cloud[i]);
    m.query.push_back(query_tree.point(nn[i].index));
    sq_sum += nn[i].sq_dist;
  }
  if (!m.anchor.empty()) m.rmse = std::sqrt(sq_sum / static_cast<double>(m.anchor.size()));
  return m;
}

}  // namespace

IcpResult icp_refine_traced(const PoseEstimate& estimate,
                            std::span<const Eigen::Vector3d> anchor_cloud,
                            std::span<const Eigen::Vector3d> query_cloud, const IcpConfig& config,
                            Execution exec) {
  if (anchor_cloud.empty() || query_cloud.empty()) {
    throw Error(ErrorKind::DegenerateGeometry, "ICP needs non-empty clouds");
  }
  if (!(config.rejection_distance > 0.0) || config.max_iterations < 0) {
    throw Error(ErrorKind::Configuration, "invalid ICP configuration");
  }

  IcpResult result;
  result.estimate = estimate;
  result.estimate.refined = false;

  const KdTree tree(query_cloud);
  RigidTransform current = estimate.transform;
  Matching matched = match_nearest(current, anchor_cloud, tree, config.rejection_distance, exec);
  if (matched.anchor.size() < 3) return result;

  result.rmse_history.push_back(matched.rmse);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const auto fit = try_umeyama(matched.anchor, matched.query, false);
    if (!fit) break;
    Matching next =
        match_nearest(fit->transform, anchor_cloud, tree, config.rejection_distance, exec);
    ++result.iterations;
    if (next.anchor.size() < 3 || next.rmse > matched.rmse) break;
    const double improvement = matched.rmse - next.rmse;
    current = fit->transform;
    matched = std::move(next);
    result.rmse_history.push_back(matched.rmse);
    if (improvement < config.tolerance) break;
  }

  result.estimate.transform = current;
  result.estimate.inlier_count = static_cast<int>(matched.anchor.size());
  result.estimate.inlier_rmse = matched.rmse;
  result.estimate.refined = true;
  return result;
}

PoseEstimate icp_refine(const PoseEstimate& estimate,
                        std::span<const Eigen::Vector3d> anchor_cloud,
                        std::span<const Eigen::Vector3d> query_cloud, const IcpConfig& config,
                        Execution exec) {
  return icp_refine_traced(estimate, anchor_cloud, query_cloud, config, exec).estimate;
}

}  // namespace conceptpose
