#pragma once

#include <conceptpose/geometry.hpp>

#include <Eigen/Core>

#include <vector>

namespace conceptpose {

/// Rotation symmetry about the line through `offset` along `axis`.
struct ContinuousSymmetry {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

/// Evaluation model in its object frame, meters. `discrete_symmetries` lists
/// the non-identity symmetry transforms; the identity is always implied.
struct ObjectModel {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Eigen::Vector3i> triangles;
  double diameter = 0.0;
  bool is_symmetric = false;
  std::vector<RigidTransform> discrete_symmetries;
  std::vector<ContinuousSymmetry> continuous_symmetries;

  bool has_surface() const noexcept { return !triangles.empty(); }
  void validate() const;
};

/// Largest pairwise vertex distance (exact, quadratic).
double compute_diameter(const std::vector<Eigen::Vector3d>& vertices);

/// Identity, the discrete set, continuous symmetries sampled in `steps`
/// rotations each, and all their products.
std::vector<RigidTransform> symmetry_set(const ObjectModel& model, int continuous_steps = 64);

}  // namespace conceptpose
