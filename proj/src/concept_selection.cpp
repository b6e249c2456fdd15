#include <conceptpose/concept_selection.hpp>

#include <conceptpose/error.hpp>

#include <algorithm>

namespace conceptpose {

namespace {

constexpr const char* kReferenceLabel = "<reference>";

}  // namespace

DatasetEvaluation evaluate_dataset(std::span<const EvaluationCase> cases,
                                   std::span<const ObjectModel> models,
                                   const PipelineConfig& pipeline, const MetricConfig& metrics) {
  DatasetEvaluation out;
  out.outcomes.reserve(cases.size());
  out.pairs.reserve(cases.size());
  for (const auto& c : cases) {
    if (c.model_index >= models.size()) {
      throw Error(ErrorKind::Configuration, "case " + c.id + " references a missing model");
    }
    CaseOutcome outcome;
    try {
      auto result = estimate_relative_pose({c.anchor.frame, c.anchor.saliency},
                                           {c.query.frame, c.query.saliency}, pipeline);
      outcome.estimate = result.estimate;
      outcome.diagnostics = std::move(result.diagnostics);
    } catch (const PipelineError& e) {
      outcome.failure_stage = e.stage();
      outcome.failure = e.what();
    }

    EvalPair pair;
    pair.model_index = c.model_index;
    if (outcome.estimate) {
      pair.estimate = compose_absolute(*outcome.estimate, c.anchor_object_pose);
    }
    pair.ground_truth = c.query_object_pose;
    pair.intrinsics = c.query.frame.intrinsics;
    pair.scene_depth = c.scene_depth;
    out.pairs.push_back(std::move(pair));
    out.outcomes.push_back(std::move(outcome));
  }

  out.report.records.reserve(out.pairs.size());
  for (const auto& p : out.pairs) {
    out.report.records.push_back(evaluate_pair(models[p.model_index], p, metrics));
  }
  out.report.aggregates = aggregate(out.report.records, metrics);
  return out;
}

SaliencyTensor restrict_labels(const SaliencyTensor& tensor, const std::vector<std::string>& labels,
                               bool reference_channel) {
  SaliencyTensor out = tensor.select(labels);
  if (reference_channel) {
    out.labels.push_back(kReferenceLabel);
    out.data.resize(out.data.size() + static_cast<std::size_t>(out.height) * out.width, 0.0f);
  }
  return out;
}

ConceptSelection select_concepts_greedy(std::span<const EvaluationCase> cases,
                                        std::span<const ObjectModel> models,
                                        const std::vector<std::string>& candidates,
                                        std::size_t budget, const SelectionConfig& config) {
  if (cases.empty()) throw Error(ErrorKind::InsufficientData, "no evaluation cases");
  if (candidates.empty()) throw Error(ErrorKind::Configuration, "no candidate labels");

  ConceptSelection sel;
  if (budget > candidates.size()) {
    sel.warnings.push_back("budget " + std::to_string(budget) + " exceeds " +
                           std::to_string(candidates.size()) + " candidates; clamped");
    budget = candidates.size();
  }

  std::vector<std::string> remaining = candidates;
  std::vector<EvaluationCase> restricted(cases.begin(), cases.end());
  while (sel.selected.size() < budget) {
    double best_ar = -1.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      std::vector<std::string> trial = sel.selected;
      trial.push_back(remaining[i]);
      for (std::size_t c = 0; c < cases.size(); ++c) {
        restricted[c].anchor.saliency =
            restrict_labels(cases[c].anchor.saliency, trial, config.reference_channel);
        restricted[c].query.saliency =
            restrict_labels(cases[c].query.saliency, trial, config.reference_channel);
      }
      const auto eval = evaluate_dataset(restricted, models, config.pipeline, config.metrics);
      const double ar = eval.report.aggregates.bop_ar;
      if (ar > best_ar) {
        best_ar = ar;
        best = i;
      }
    }
    sel.selected.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    sel.step_bop_ar.push_back(best_ar);
    sel.best_so_far.push_back(
        sel.best_so_far.empty() ? best_ar : std::max(sel.best_so_far.back(), best_ar));
  }
  return sel;
}

}  // namespace conceptpose
