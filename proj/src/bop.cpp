#include <conceptpose/metrics.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/renderer.hpp>

#include <cmath>
#include <limits>

namespace conceptpose {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool visible(double rendered, double scene, double delta) {
  return rendered > 0.0 && (scene == 0.0 || rendered - scene <= delta);
}

}  // namespace

std::vector<double> vsd(const ObjectModel& model, const RigidTransform& est,
                        const RigidTransform& gt, const Image<double>& scene_depth,
                        const CameraIntrinsics& k, std::span<const double> taus, double delta) {
  if (!model.has_surface()) {
    throw Error(ErrorKind::UnsupportedModel, "VSD needs a triangle mesh to render");
  }
  const bool has_scene = !scene_depth.empty();
  if (has_scene && !scene_depth.same_shape(k.width, k.height)) {
    throw Error(ErrorKind::Configuration, "scene depth does not match the intrinsics");
  }
  const DepthRender est_r = render_depth(model, est, k);
  const DepthRender gt_r = render_depth(model, gt, k);

  std::size_t union_count = 0;
  std::vector<std::size_t> cost(taus.size(), 0);
  for (std::size_t i = 0; i < est_r.depth.size(); ++i) {
    const double de = est_r.depth.data()[i];
    const double dg = gt_r.depth.data()[i];
    const double ds = has_scene ? scene_depth.data()[i] : 0.0;
    const bool vis_gt = visible(dg, ds, delta);
    // An estimate is never penalized for being hidden where the true object is visible.
    const bool vis_est = visible(de, ds, delta) || (vis_gt && de > 0.0);
    if (!vis_gt && !vis_est) continue;
    ++union_count;
    const bool both = vis_gt && vis_est;
    for (std::size_t t = 0; t < taus.size(); ++t) {
      if (!both || !(std::abs(de - dg) < taus[t])) ++cost[t];
    }
  }
  std::vector<double> errors(taus.size(), 1.0);
  if (union_count == 0) return errors;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    errors[t] = static_cast<double>(cost[t]) / static_cast<double>(union_count);
  }
  return errors;
}

double vsd(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
           const Image<double>& scene_depth, const CameraIntrinsics& k, double tau, double delta) {
  const double taus[] = {tau};
  return vsd(model, est, gt, scene_depth, k, taus, delta).front();
}

int PairEvaluation::mssd_hits() const {
  int hits = 0;
  for (double f : bop_fractions()) hits += mssd < f * diameter;
  return hits;
}

int PairEvaluation::mspd_hits() const {
  int hits = 0;
  for (double f : bop_fractions()) hits += mspd < f * image_dimension;
  return hits;
}

int PairEvaluation::vsd_hits() const {
  int hits = 0;
  for (double e : vsd_errors) {
    for (double theta : bop_fractions()) hits += e < theta;
  }
  return hits;
}

PairEvaluation evaluate_pair(const ObjectModel& model, const EvalPair& pair,
                             const MetricConfig& config) {
  PairEvaluation r;
  r.is_symmetric = model.is_symmetric;
  r.diameter = model.diameter;
  r.vsd_supported = model.has_surface();
  const auto& k = pair.intrinsics;
  r.image_dimension = config.mspd_dimension == MspdDimension::Width
                          ? static_cast<double>(k.width)
                          : static_cast<double>(std::max(k.width, k.height));
  if (!pair.estimate) {
    r.estimate_valid = false;
    r.add = r.add_s = r.add_adaptive = r.mssd = r.mspd = kInf;
    r.rotation_err = r.translation_err = kInf;
    r.vsd_errors.fill(1.0);
    r.iou3d = 0.0;
    return r;
  }

  const RigidTransform& est = *pair.estimate;
  const RigidTransform& gt = pair.ground_truth;
  r.estimate_valid = true;
  r.add = add_error(model, est, gt);
  r.add_s = add_s_error(model, est, gt);
  r.add_adaptive = model.is_symmetric ? r.add_s : r.add;
  r.mssd = mssd(model, est, gt, config.continuous_symmetry_steps);
  r.mspd = mspd(model, est, gt, k, config.continuous_symmetry_steps);
  if (r.vsd_supported) {
    std::array<double, kBopSteps> taus{};
    const auto fractions = bop_fractions();
    for (int i = 0; i < kBopSteps; ++i) taus[i] = fractions[i] * model.diameter;
    const auto errors = vsd(model, est, gt, pair.scene_depth, k, taus, config.vsd_delta);
    std::copy(errors.begin(), errors.end(), r.vsd_errors.begin());
  } else {
    r.vsd_errors.fill(1.0);
  }
  r.rotation_err = rotation_angle_deg(est, gt);
  r.translation_err = translation_error(est, gt);
  r.iou3d = iou3d(model, est, gt, config.iou_samples_per_axis);
  return r;
}

DatasetAggregates aggregate(std::span<const PairEvaluation> records, const MetricConfig& config) {
  DatasetAggregates a;
  a.pairs = records.size();
  if (records.empty()) return a;

  std::size_t add_hits = 0, add_s_hits = 0, adaptive_hits = 0;
  std::size_t mssd_hits = 0, mspd_hits = 0, vsd_hits = 0;
  std::size_t loose_hits = 0, strict_hits = 0, iou50 = 0, iou75 = 0;
  double iou_sum = 0.0;
  std::vector<double> add_errors, add_s_errors;
  add_errors.reserve(records.size());
  add_s_errors.reserve(records.size());

  const double frac = config.add_threshold_fraction;
  for (const auto& r : records) {
    add_hits += r.add < frac * r.diameter;
    add_s_hits += r.add_s < frac * r.diameter;
    adaptive_hits += r.add_adaptive < frac * r.diameter;
    mssd_hits += static_cast<std::size_t>(r.mssd_hits());
    mspd_hits += static_cast<std::size_t>(r.mspd_hits());
    if (r.vsd_supported) {
      ++a.vsd_pairs;
      vsd_hits += static_cast<std::size_t>(r.vsd_hits());
    }
    loose_hits += r.rotation_err < 10.0 && r.translation_err < 0.05;
    strict_hits += r.rotation_err < 5.0 && r.translation_err < 0.02;
    iou_sum += r.iou3d;
    iou50 += r.iou3d > 0.5;
    iou75 += r.iou3d > 0.75;
    add_errors.push_back(r.add);
    add_s_errors.push_back(r.add_s);
  }

  const auto n = static_cast<double>(records.size());
  a.add_recall = add_hits / n;
  a.add_s_recall = add_s_hits / n;
  a.add_adaptive_recall = adaptive_hits / n;
  a.add_auc = auc(add_errors, config.auc_max_threshold, config.auc_steps);
  a.add_s_auc = auc(add_s_errors, config.auc_max_threshold, config.auc_steps);
  a.ar_mssd = mssd_hits / (kBopSteps * n);
  a.ar_mspd = mspd_hits / (kBopSteps * n);
  if (a.vsd_pairs > 0) {
    a.ar_vsd = vsd_hits / (kBopSteps * kBopSteps * static_cast<double>(a.vsd_pairs));
    a.bop_ar = (a.ar_vsd + a.ar_mssd + a.ar_mspd) / 3.0;
  } else {
    a.bop_ar = (a.ar_mssd + a.ar_mspd) / 2.0;
  }
  a.recall_10deg_5cm = loose_hits / n;
  a.recall_5deg_2cm = strict_hits / n;
  a.miou3d = iou_sum / n;
  a.iou3d_50 = iou50 / n;
  a.iou3d_75 = iou75 / n;
  return a;
}

double pose_recall(std::span<const PairEvaluation> records, double rot_thresh_deg,
                   double trans_thresh_m) {
  if (records.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : records) {
    hits += r.rotation_err < rot_thresh_deg && r.translation_err < trans_thresh_m;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double add_adaptive_recall(std::span<const EvalPair> pairs, std::span<const ObjectModel> models,
                           double threshold_fraction) {
  if (pairs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    if (!p.estimate) continue;
    const ObjectModel& m = models[p.model_index];
    const double e = m.is_symmetric ? add_s_error(m, *p.estimate, p.ground_truth)
                                    : add_error(m, *p.estimate, p.ground_truth);
    hits += e < threshold_fraction * m.diameter;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

BopScores bop_ar(std::span<const EvalPair> pairs, std::span<const ObjectModel> models,
                 const MetricConfig& config) {
  std::vector<PairEvaluation> records;
  records.reserve(pairs.size());
  for (const auto& p : pairs) records.push_back(evaluate_pair(models[p.model_index], p, config));
  const DatasetAggregates a = aggregate(records, config);
  return {a.ar_vsd, a.ar_mssd, a.ar_mspd, a.bop_ar};
}

}  // namespace conceptpose
