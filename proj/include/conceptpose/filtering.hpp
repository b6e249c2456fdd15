#pragma once

#include <conceptpose/concept_cloud.hpp>
#include <conceptpose/execution.hpp>

#include <vector>

namespace conceptpose {

struct FilterConfig {
  int k = 20;
  double std_ratio = 2.0;
  double sigma_mult = 2.5;
};

/// Indices kept by the k-nearest-neighbour statistical filter: a point is
/// dropped when its mean neighbour distance exceeds mean + std_ratio * std.
/// Clouds with at most k points are kept whole.
std::vector<int> local_outlier_indices(const ConceptPointCloud& cloud, int k, double std_ratio,
                                       Execution exec = Execution::Parallel);

/// Indices kept by the radial filter around the arithmetic centroid.
std::vector<int> global_outlier_indices(const ConceptPointCloud& cloud, double sigma_mult = 2.5);

ConceptPointCloud local_outlier_filter(const ConceptPointCloud& cloud, int k, double std_ratio,
                                       Execution exec = Execution::Parallel);
ConceptPointCloud global_outlier_filter(const ConceptPointCloud& cloud, double sigma_mult = 2.5);

}  // namespace conceptpose
