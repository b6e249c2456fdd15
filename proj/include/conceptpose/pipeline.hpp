/**
 * @file pipeline.hpp
 * @brief End-to-end relative pose: clouds, filters, optional voxelization,
 *        correspondence, RANSAC and ICP, with per-stage diagnostics.
 */
#pragma once

#include <conceptpose/concept_cloud.hpp>
#include <conceptpose/correspondence.hpp>
#include <conceptpose/error.hpp>
#include <conceptpose/execution.hpp>
#include <conceptpose/filtering.hpp>
#include <conceptpose/geometry.hpp>
#include <conceptpose/pose_solver.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conceptpose {

/// Which clouds ICP aligns.
enum class IcpCloud {
  Filtered,  ///< dense clouds after both filters
  Matched,   ///< the clouds fed to correspondence (voxel centers when voxelizing)
};

struct PipelineConfig {
  double temperature = 0.1;
  bool voxelize = false;
  int resolution = 64;
  bool filter_before_voxelize = true;
  FilterConfig filter;
  SimilarityMeasure measure = SimilarityMeasure::ForwardKl;
  /// Unset means 10,000 dense or 5,000 voxelized.
  std::optional<std::size_t> max_correspondences;
  /// Unset means 100,000 dense or 50,000 voxelized.
  std::optional<int> ransac_iterations;
  double inlier_threshold = 0.01;
  bool estimate_scale = false;
  bool icp = true;
  IcpConfig icp_config;
  IcpCloud icp_cloud = IcpCloud::Filtered;
  std::uint64_t seed = 42;
  Execution execution = Execution::Parallel;

  std::size_t resolved_max_correspondences() const;
  RansacConfig resolved_ransac() const;
  /// Throws ErrorKind::Configuration.
  void validate() const;
};

struct CloudCounts {
  std::size_t backprojected = 0;
  std::size_t after_local = 0;
  std::size_t after_global = 0;
  std::size_t matched = 0;  ///< size of the cloud entering correspondence
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineDiagnostics {
  CloudCounts anchor;
  CloudCounts query;
  std::size_t correspondences = 0;
  int ransac_inliers = 0;
  int best_iteration = -1;
  bool refit_applied = false;
  int icp_iterations = 0;
  double icp_rmse = 0.0;
  std::vector<StageTiming> timings;

  double seconds(const std::string& stage) const;
};

struct PipelineResult {
  PoseEstimate estimate;
  PipelineDiagnostics diagnostics;
};

struct FrameInput {
  const Frame& frame;
  const SaliencyTensor& saliency;
};

/// Library error tagged with the pipeline stage that raised it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Anchor -> query camera motion. Throws PipelineError.
PipelineResult estimate_relative_pose(const FrameInput& anchor, const FrameInput& query,
                                      const PipelineConfig& config);

/// Query object pose from the relative estimate and the anchor's object pose.
RigidTransform compose_absolute(const PoseEstimate& estimate,
                                const RigidTransform& anchor_object_pose);

}  // namespace conceptpose
