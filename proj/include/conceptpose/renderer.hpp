/**
 * @file renderer.hpp
 * @brief Deterministic software z-buffer rasterizer.
 *
 * Pixels are sampled at their centers (u, v). Coverage on shared edges
 * follows a top-left style rule so every pixel is owned by exactly one of
 * two adjacent triangles. Depth is perspective correct, equal to the z of
 * the ray-triangle intersection. Triangles with any vertex at z <= 1e-6 m
 * are dropped.
 */
#pragma once

#include <conceptpose/concept_cloud.hpp>
#include <conceptpose/execution.hpp>
#include <conceptpose/geometry.hpp>
#include <conceptpose/object_model.hpp>

#include <Eigen/Core>

#include <cstdint>

namespace conceptpose {

inline constexpr double kNearPlane = 1e-6;

struct DepthRender {
  Image<double> depth;
  Image<std::uint8_t> mask;
};

/// Per-pixel visible triangle and its perspective-correct barycentrics.
struct RasterFragments {
  DepthRender render;
  Image<int> triangle;  ///< -1 where nothing is visible
  Image<Eigen::Vector3d> barycentric;
};

RasterFragments rasterize(const ObjectModel& model, const RigidTransform& pose,
                          const CameraIntrinsics& k, Execution exec = Execution::Parallel);

DepthRender render_depth(const ObjectModel& model, const RigidTransform& pose,
                         const CameraIntrinsics& k, Execution exec = Execution::Parallel);

/// Raw per-vertex saliency values (V x L, each in [0,1]) with their labels.
struct ConceptField {
  std::vector<std::string> labels;
  std::string category;
  Eigen::MatrixXd values;
};

struct SyntheticView {
  Frame frame;
  SaliencyTensor saliency;
};

/// Renders a frame and the matching saliency tensor. Throws
/// ErrorKind::DegenerateFrame when nothing is visible.
SyntheticView render_synthetic_frame(const ObjectModel& model, const RigidTransform& pose,
                                     const CameraIntrinsics& k, const ConceptField& field,
                                     Execution exec = Execution::Parallel);

}  // namespace conceptpose
