/**
 * @file correspondence.hpp
 * @brief Semantic 3D-3D matching over concept distributions.
 *
 * Every measure is oriented so that larger means more similar. KL-based
 * measures take logarithms of probabilities floored at 1e-12.
 */
#pragma once

#include <conceptpose/concept_cloud.hpp>
#include <conceptpose/execution.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace conceptpose {

enum class SimilarityMeasure { ForwardKl, ReverseKl, BidirectionalKl, Asymmetric, Cosine };

std::string_view to_string(SimilarityMeasure m);
std::optional<SimilarityMeasure> parse_measure(std::string_view name);
inline constexpr SimilarityMeasure kAllMeasures[] = {
    SimilarityMeasure::ForwardKl, SimilarityMeasure::ReverseKl,
    SimilarityMeasure::BidirectionalKl, SimilarityMeasure::Asymmetric,
    SimilarityMeasure::Cosine};

inline constexpr double kLogFloor = 1e-12;

/// Similarity of two probability rows. Throws ErrorKind::ContractViolation
/// unless both rows are strictly positive and sum to 1 within 1e-5.
double similarity(std::span<const double> query_row, std::span<const double> anchor_row,
                  SimilarityMeasure measure);

struct Correspondence {
  Eigen::Vector3d query_point;
  Eigen::Vector3d anchor_point;
  double score = 0.0;
  int query_index = -1;
  int anchor_index = -1;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  SimilarityMeasure measure = SimilarityMeasure::ForwardKl;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

/// Query rows retained when capping at max_count: all rows when the cloud is
/// small enough, else a seeded uniform sample without replacement, ascending.
std::vector<int> subsample_indices(std::size_t n, std::size_t max_count, std::uint64_t seed);

/// For each retained query row, the anchor row of maximal similarity (ties go
/// to the lower anchor index).
CorrespondenceSet match(const ConceptPointCloud& query, const ConceptPointCloud& anchor,
                        SimilarityMeasure measure, std::size_t max_correspondences,
                        std::uint64_t seed, Execution exec = Execution::Parallel);

}  // namespace conceptpose
