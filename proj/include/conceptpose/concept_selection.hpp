/**
 * @file concept_selection.hpp
 * @brief Dataset evaluation of the full pipeline and greedy forward
 *        selection of concept labels by BOP AR.
 */
#pragma once

#include <conceptpose/metrics.hpp>
#include <conceptpose/pipeline.hpp>
#include <conceptpose/renderer.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace conceptpose {

/// One anchor/query pair with ground truth object poses.
struct EvaluationCase {
  std::string id;
  SyntheticView anchor;
  SyntheticView query;
  RigidTransform anchor_object_pose;
  RigidTransform query_object_pose;
  std::size_t model_index = 0;
  Image<double> scene_depth;  ///< empty means the object is unoccluded
};

struct CaseOutcome {
  std::optional<PoseEstimate> estimate;  ///< relative anchor -> query
  std::optional<PipelineDiagnostics> diagnostics;
  std::string failure_stage;
  std::string failure;
};

struct DatasetEvaluation {
  std::vector<CaseOutcome> outcomes;
  std::vector<EvalPair> pairs;
  DatasetReport report;
};

/// Runs the pipeline on every case and scores the composed absolute query
/// poses. Pipeline failures become missing estimates.
DatasetEvaluation evaluate_dataset(std::span<const EvaluationCase> cases,
                                   std::span<const ObjectModel> models,
                                   const PipelineConfig& pipeline,
                                   const MetricConfig& metrics = {});

struct SelectionConfig {
  PipelineConfig pipeline;
  MetricConfig metrics;
  /// Appends a constant zero channel while scoring a subset, so a single
  /// label still yields non-uniform concept rows.
  bool reference_channel = true;
};

struct ConceptSelection {
  std::vector<std::string> selected;
  std::vector<double> step_bop_ar;   ///< AR after each addition
  std::vector<double> best_so_far;   ///< running maximum of step_bop_ar
  std::vector<std::string> warnings;
};

/// Restricts a tensor to `labels`, optionally adding the reference channel.
SaliencyTensor restrict_labels(const SaliencyTensor& tensor, const std::vector<std::string>& labels,
                               bool reference_channel);

/// Forward selection: each step adds the candidate whose inclusion gives the
/// highest BOP AR (ties go to the earlier candidate). A budget above the
/// candidate count is clamped and reported in `warnings`.
ConceptSelection select_concepts_greedy(std::span<const EvaluationCase> cases,
                                        std::span<const ObjectModel> models,
                                        const std::vector<std::string>& candidates,
                                        std::size_t budget, const SelectionConfig& config);

}  // namespace conceptpose
