/**
 * @file pose_solver.hpp
 * @brief Robust anchor->query rigid pose from putative correspondences.
 *
 * RANSAC draws minimal samples from a generator keyed on (seed, iteration),
 * fits each with Umeyama's closed form and keeps the model with the most
 * inliers (ties go to the lower iteration). The result does not depend on
 * how iterations are scheduled across threads. ICP then refines the winner
 * with point-to-point nearest-neighbour matching.
 */
#pragma once

#include <conceptpose/correspondence.hpp>
#include <conceptpose/execution.hpp>
#include <conceptpose/geometry.hpp>

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace conceptpose {

struct UmeyamaResult {
  RigidTransform transform;
  double scale = 1.0;
};

/// Least-squares fit of query_i ≈ s * R * anchor_i + t. With estimate_scale
/// off, s = 1. Throws ErrorKind::DegenerateSample on rank-deficient
/// covariance (fewer than 3 points, or collinear points).
UmeyamaResult umeyama(std::span<const Eigen::Vector3d> anchor_pts,
                      std::span<const Eigen::Vector3d> query_pts, bool estimate_scale = false);

/// Non-throwing variant used inside the RANSAC loop.
std::optional<UmeyamaResult> try_umeyama(std::span<const Eigen::Vector3d> anchor_pts,
                                         std::span<const Eigen::Vector3d> query_pts,
                                         bool estimate_scale = false);

struct RansacConfig {
  int iterations = 100'000;
  double inlier_threshold = 0.01;
  int minimal_set_size = 3;
  std::uint64_t seed = 42;
  bool estimate_scale = false;
  bool refit_on_inliers = true;

  void validate() const;
};

struct PoseEstimate {
  RigidTransform transform;  ///< anchor -> query
  int inlier_count = 0;
  double inlier_rmse = 0.0;
  bool refined = false;
};

struct RansacReport {
  PoseEstimate estimate;
  int best_iteration = -1;
  int best_candidate_inliers = 0;
  bool refit_applied = false;
};

namespace detail {

/// Indices of the minimal sample drawn at `iteration`; distinct, in draw order.
std::vector<int> minimal_sample(std::uint64_t seed, std::uint64_t iteration, int population,
                                int sample_size);

/// Inliers of one candidate model over the full correspondence set.
int count_inliers(const CorrespondenceSet& corr, const RigidTransform& t, double threshold);

/// The candidate model fitted at `iteration`, or nullopt for a degenerate sample.
std::optional<RigidTransform> ransac_candidate(const CorrespondenceSet& corr,
                                               const RansacConfig& config, int iteration);

}  // namespace detail

PoseEstimate ransac(const CorrespondenceSet& correspondences, const RansacConfig& config,
                    Execution exec = Execution::Parallel);
RansacReport ransac_report(const CorrespondenceSet& correspondences, const RansacConfig& config,
                           Execution exec = Execution::Parallel);

struct IcpConfig {
  int max_iterations = 50;
  double tolerance = 1e-6;           ///< meters of RMSE improvement
  double rejection_distance = 0.01;  ///< meters
};

struct IcpResult {
  PoseEstimate estimate;
  /// Accepted-pair RMSE after each accepted step; entry 0 is the input pose.
  std::vector<double> rmse_history;
  int iterations = 0;
};

/// Point-to-point ICP moving anchor points into the query frame. Returns the
/// input unchanged with refined=false if no pair survives the rejection
/// distance at the start. A step that would raise the RMSE is not taken.
IcpResult icp_refine_traced(const PoseEstimate& estimate,
                            std::span<const Eigen::Vector3d> anchor_cloud,
                            std::span<const Eigen::Vector3d> query_cloud, const IcpConfig& config,
                            Execution exec = Execution::Parallel);

PoseEstimate icp_refine(const PoseEstimate& estimate,
                        std::span<const Eigen::Vector3d> anchor_cloud,
                        std::span<const Eigen::Vector3d> query_cloud, const IcpConfig& config,
                        Execution exec = Execution::Parallel);

}  // namespace conceptpose
