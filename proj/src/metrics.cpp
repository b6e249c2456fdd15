#include <conceptpose/metrics.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/kdtree.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace conceptpose {

std::array<double, kBopSteps> bop_fractions() {
  std::array<double, kBopSteps> f{};
  for (int i = 0; i < kBopSteps; ++i) f[i] = 0.05 * (i + 1);
  return f;
}

namespace {

void require_vertices(const ObjectModel& model) {
  if (model.vertices.empty()) throw Error(ErrorKind::Configuration, "object model is empty");
}

}  // namespace

double add_error(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt) {
  require_vertices(model);
  double sum = 0.0;
  for (const auto& x : model.vertices) sum += (est(x) - gt(x)).norm();
  return sum / static_cast<double>(model.vertices.size());
}

double add_s_error(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt) {
  require_vertices(model);
  std::vector<Eigen::Vector3d> target(model.vertices.size());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = gt(model.vertices[i]);
  const KdTree tree(target);
  double sum = 0.0;
  for (const auto& x : model.vertices) sum += std::sqrt(tree.nearest(est(x)).sq_dist);
  return sum / static_cast<double>(model.vertices.size());
}

double threshold_recall(std::span<const double> errors, std::span<const double> diameters,
                        double fraction) {
  if (errors.size() != diameters.size()) {
    throw Error(ErrorKind::ContractViolation, "errors and diameters differ in length");
  }
  if (errors.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) hits += errors[i] < fraction * diameters[i];
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

double auc(std::span<const double> errors, double max_threshold, int steps) {
  if (errors.empty()) throw Error(ErrorKind::InsufficientData, "AUC of an empty error list");
  if (!(max_threshold > 0.0) || steps < 1) {
    throw Error(ErrorKind::Configuration, "AUC needs a positive range and >= 1 step");
  }
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto recall_below = [&](double t) {
    return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin()) / n;
  };
  // Right limit at zero: the fraction of exactly-zero errors.
  double previous =
      static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), 0.0) - sorted.begin()) / n;
  double area = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double current = recall_below(max_threshold * i / steps);
    area += 0.5 * (previous + current);
    previous = current;
  }
  return area / steps;
}

double mssd(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
            int continuous_steps) {
  require_vertices(model);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sym : symmetry_set(model, continuous_steps)) {
    const RigidTransform gt_sym = compose(gt, sym);
    double worst = 0.0;
    for (const auto& x : model.vertices) {
      worst = std::max(worst, (est(x) - gt_sym(x)).norm());
      if (worst >= best) break;
    }
    best = std::min(best, worst);
  }
  return best;
}

double mspd(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
            const CameraIntrinsics& k, int continuous_steps) {
  require_vertices(model);
  std::vector<Eigen::Vector2d> est_px(model.vertices.size());
  for (std::size_t i = 0; i < est_px.size(); ++i) est_px[i] = project(k, est(model.vertices[i]));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sym : symmetry_set(model, continuous_steps)) {
    const RigidTransform gt_sym = compose(gt, sym);
    double worst = 0.0;
    for (std::size_t i = 0; i < est_px.size(); ++i) {
      worst = std::max(worst, (est_px[i] - project(k, gt_sym(model.vertices[i]))).norm());
      if (worst >= best) break;
    }
    best = std::min(best, worst);
  }
  return best;
}

double iou3d(const ObjectModel& model, const RigidTransform& est, const RigidTransform& gt,
             int samples_per_axis) {
  require_vertices(model);
  if (samples_per_axis < 1) throw Error(ErrorKind::Configuration, "IoU needs >= 1 sample per axis");
  Eigen::Vector3d lo = model.vertices.front();
  Eigen::Vector3d hi = lo;
  for (const auto& v : model.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }

  Eigen::Vector3d world_lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d world_hi = -world_lo;
  for (const RigidTransform* t : {&est, &gt}) {
    for (int corner = 0; corner < 8; ++corner) {
      const Eigen::Vector3d c((corner & 1) ? hi.x() : lo.x(), (corner & 2) ? hi.y() : lo.y(),
                              (corner & 4) ? hi.z() : lo.z());
      const Eigen::Vector3d w = (*t)(c);
      world_lo = world_lo.cwiseMin(w);
      world_hi = world_hi.cwiseMax(w);
    }
  }

  const RigidTransform est_inv = invert(est);
  const RigidTransform gt_inv = invert(gt);
  auto in_box = [&](const Eigen::Vector3d& local) {
    return (local.array() >= lo.array()).all() && (local.array() <= hi.array()).all();
  };
  const Eigen::Vector3d step = (world_hi - world_lo) / samples_per_axis;
  std::size_t both = 0;
  std::size_t either = 0;
  for (int i = 0; i < samples_per_axis; ++i) {
    for (int j = 0; j < samples_per_axis; ++j) {
      for (int l = 0; l < samples_per_axis; ++l) {
        const Eigen::Vector3d p =
            world_lo + Eigen::Vector3d(i + 0.5, j + 0.5, l + 0.5).cwiseProduct(step);
        const bool a = in_box(est_inv(p));
        const bool b = in_box(gt_inv(p));
        both += a && b;
        either += a || b;
      }
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace conceptpose
