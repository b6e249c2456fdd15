/**
 * @file concept_cloud.hpp
 * @brief Concept point clouds: backprojected points paired with per-point
 *        probability distributions over concept labels.
 */
#pragma once

#include <conceptpose/execution.hpp>
#include <conceptpose/geometry.hpp>

#include <Eigen/Core>

#include <string>
#include <vector>

namespace conceptpose {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-concept 2D saliency stack, channel-major then row-major, values in [0,1].
struct SaliencyTensor {
  std::vector<std::string> labels;
  std::string object_category;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  SaliencyTensor() = default;
  SaliencyTensor(std::vector<std::string> labels, std::string category, int height, int width);

  int channels() const noexcept { return static_cast<int>(labels.size()); }

  float& at(int channel, int u, int v) {
    return data[(static_cast<std::size_t>(channel) * height + v) * width + u];
  }
  float at(int channel, int u, int v) const {
    return data[(static_cast<std::size_t>(channel) * height + v) * width + u];
  }

  /// Throws ErrorKind::Configuration on shape or range violations.
  void validate() const;

  /// Channels for `subset`, in the order given. Unknown labels throw.
  SaliencyTensor select(const std::vector<std::string>& subset) const;

  friend bool operator==(const SaliencyTensor&, const SaliencyTensor&) = default;
};

struct ConceptPointCloud {
  std::vector<Eigen::Vector3d> points;
  /// Source pixel of each point; empty for voxelized clouds.
  std::vector<Pixel> pixels;
  RowMatrix concepts;
  std::vector<std::string> labels;
  double temperature = 0.1;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  int channels() const noexcept { return static_cast<int>(labels.size()); }

  /// Rows strictly positive and summing to 1 within tol; sizes consistent.
  bool rows_are_distributions(double tol = 1e-5) const;

  /// Keeps the listed rows, in the listed order.
  ConceptPointCloud subset(const std::vector<int>& keep) const;
};

struct VoxelizedCloud {
  ConceptPointCloud cloud;
  double scale = 1.0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  int grid_resolution = 64;
};

/// Temperature softmax of one raw saliency row, computed with max subtraction.
void softmax_row(const float* raw, int channels, double temperature, double* out);

ConceptPointCloud build_cloud(const Frame& frame, const SaliencyTensor& saliency,
                              double temperature,
                              Execution exec = Execution::Parallel);

/// Mean-pools concept rows over a resolution³ grid spanning the isotropically
/// normalized cloud. Output order follows the linear voxel index.
VoxelizedCloud voxelize(const ConceptPointCloud& cloud, int resolution = 64);

}  // namespace conceptpose
