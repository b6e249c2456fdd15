/**
 * @file metrics.hpp
 * @brief Pose-error functions and dataset aggregates.
 *
 * ADD family with curve AUC, the three BOP errors (VSD, MSSD, MSPD) with
 * their average recalls, rotation/translation recalls and box 3D IoU.
 * Aggregates are pure functions of the per-pair records.
 */
#pragma once

#include <conceptpose/geometry.hpp>
#include <conceptpose/image.hpp>
#include <conceptpose/object_model.hpp>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace conceptpose {

inline constexpr int kBopSteps = 10;

/// Fractions 0.05, 0.10, ..., 0.50 shared by the MSSD, MSPD and VSD grids.
std::array<double, kBopSteps> bop_fractions();

enum class MspdDimension { Width, MaxSide };

struct MetricConfig {
  double add_threshold_fraction = 0.1;
  double auc_max_threshold = 0.1;
  int auc_steps = 100;
  int continuous_symmetry_steps = 64;
  MspdDimension mspd_dimension = MspdDimension::Width;
  double vsd_delta = 0.015;  ///< visibility tolerance, meters
  int iou_samples_per_axis = 64;
};

double add_error(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt);
double add_s_error(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt);

/// Recall of error < fraction * diameter over (error, diameter) samples.
double threshold_recall(std::span<const double> errors, std::span<const double> diameters,
                        double fraction);

/// Area under the recall-vs-threshold curve on (0, max_threshold], sampled
/// at `steps` thresholds plus the limit at 0, trapezoid rule, normalized.
double auc(std::span<const double> errors, double max_threshold = 0.1, int steps = 100);

double mssd(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
            int continuous_steps = 64);
double mspd(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
            const CameraIntrinsics& k, int continuous_steps = 64);

/// VSD error for each misalignment tolerance in `taus` (meters). An empty
/// scene depth means no occluders. Throws ErrorKind::UnsupportedModel for
/// triangle-free models.
std::vector<double> vsd(const ObjectModel& model, const RigidTransform& est,
                        const RigidTransform& gt, const Image<double>& scene_depth,
                        const CameraIntrinsics& k, std::span<const double> taus,
                        double delta = 0.015);
double vsd(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
           const Image<double>& scene_depth, const CameraIntrinsics& k, double tau,
           double delta = 0.015);

double iou3d(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
             int samples_per_axis = 64);

/// One anchor-query pair to score. A missing estimate counts as a failure
/// under every metric.
struct EvalPair {
  std::size_t model_index = 0;
  std::optional<RigidTransform> estimate;
  RigidTransform ground_truth;
  CameraIntrinsics intrinsics;
  Image<double> scene_depth;
};

struct PairEvaluation {
  bool estimate_valid = false;
  bool is_symmetric = false;
  double diameter = 0.0;
  double image_dimension = 0.0;
  double add = 0.0;
  double add_s = 0.0;
  double add_adaptive = 0.0;
  double mssd = 0.0;
  double mspd = 0.0;
  bool vsd_supported = true;
  std::array<double, kBopSteps> vsd_errors{};  ///< per tau = fraction * diameter
  double rotation_err = 0.0;
  double translation_err = 0.0;
  double iou3d = 0.0;

  int mssd_hits() const;  ///< of 10 thresholds
  int mspd_hits() const;  ///< of 10 thresholds
  int vsd_hits() const;   ///< of the 10 x 10 tau/theta grid
};

PairEvaluation evaluate_pair(const ObjectModel& model, const EvalPair& pair,
                             const MetricConfig& config = {});

struct DatasetAggregates {
  std::size_t pairs = 0;
  std::size_t vsd_pairs = 0;
  double add_recall = 0.0;
  double add_s_recall = 0.0;
  double add_adaptive_recall = 0.0;
  double add_auc = 0.0;
  double add_s_auc = 0.0;
  double ar_vsd = 0.0;
  double ar_mssd = 0.0;
  double ar_mspd = 0.0;
  double bop_ar = 0.0;
  double recall_10deg_5cm = 0.0;
  double recall_5deg_2cm = 0.0;
  double miou3d = 0.0;
  double iou3d_50 = 0.0;
  double iou3d_75 = 0.0;
};

struct DatasetReport {
  std::vector<PairEvaluation> records;
  DatasetAggregates aggregates;
};

/// Recomputable fold over the records in index order. Recall aggregates
/// are integer hit counts divided by totals, so they do not depend on the
/// record order.
DatasetAggregates aggregate(std::span<const PairEvaluation> records,
                            const MetricConfig& config = {});

double pose_recall(std::span<const PairEvaluation> records, double rot_thresh_deg,
                   double trans_thresh_m);

/// ADD(-S) recall over pairs that reference models by index.
double add_adaptive_recall(std::span<const EvalPair> pairs, std::span<const ObjectModel> models,
                           double threshold_fraction = 0.1);

struct BopScores {
  double ar_vsd = 0.0;
  double ar_mssd = 0.0;
  double ar_mspd = 0.0;
  double bop_ar = 0.0;
};

BopScores bop_ar(std::span<const EvalPair> pairs, std::span<const ObjectModel> models,
                 const MetricConfig& config = {});

}  // namespace conceptpose
