#include <conceptpose/pose_solver.hpp>

#include <conceptpose/error.hpp>

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace conceptpose {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Correspondences laid out as structure-of-arrays for the scoring loop.
struct PackedPairs {
  std::vector<double> ax, ay, az, qx, qy, qz;

  explicit PackedPairs(const CorrespondenceSet& c) {
    const std::size_t n = c.size();
    for (auto* v : {&ax, &ay, &az, &qx, &qy, &qz}) v->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = c.pairs[i];
      ax[i] = p.anchor_point.x();
      ay[i] = p.anchor_point.y();
      az[i] = p.anchor_point.z();
      qx[i] = p.query_point.x();
      qy[i] = p.query_point.y();
      qz[i] = p.query_point.z();
    }
  }
  int size() const { return static_cast<int>(ax.size()); }
};

constexpr int kScoreChunk = 64;

/// Inlier count of a model, abandoning the count as soon as it can no longer
/// exceed `must_beat`. Abandoned candidates return -1.
int score_model(const PackedPairs& p, const RigidTransform& t, double sq_threshold,
                int must_beat) {
  const Eigen::Matrix3d& r = t.rotation;
  const double r00 = r(0, 0), r01 = r(0, 1), r02 = r(0, 2);
  const double r10 = r(1, 0), r11 = r(1, 1), r12 = r(1, 2);
  const double r20 = r(2, 0), r21 = r(2, 1), r22 = r(2, 2);
  const double tx = t.translation.x(), ty = t.translation.y(), tz = t.translation.z();
  const int n = p.size();
  int count = 0;
  for (int begin = 0; begin < n; begin += kScoreChunk) {
    const int end = std::min(n, begin + kScoreChunk);
    int chunk = 0;
    for (int i = begin; i < end; ++i) {
      const double dx = r00 * p.ax[i] + r01 * p.ay[i] + r02 * p.az[i] + tx - p.qx[i];
      const double dy = r10 * p.ax[i] + r11 * p.ay[i] + r12 * p.az[i] + ty - p.qy[i];
      const double dz = r20 * p.ax[i] + r21 * p.ay[i] + r22 * p.az[i] + tz - p.qz[i];
      chunk += (dx * dx + dy * dy + dz * dz < sq_threshold) ? 1 : 0;
    }
    count += chunk;
    if (count + (n - end) <= must_beat) return -1;
  }
  return count;
}

std::optional<RigidTransform> fit_sample(const PackedPairs& p, const std::vector<int>& sample,
                                         bool estimate_scale) {
  std::array<Eigen::Vector3d, 8> a_small, q_small;
  std::vector<Eigen::Vector3d> a_big, q_big;
  const std::size_t k = sample.size();
  Eigen::Vector3d* a = a_small.data();
  Eigen::Vector3d* q = q_small.data();
  if (k > a_small.size()) {
    a_big.resize(k);
    q_big.resize(k);
    a = a_big.data();
    q = q_big.data();
  }
  for (std::size_t s = 0; s < k; ++s) {
    const int i = sample[s];
    a[s] = {p.ax[i], p.ay[i], p.az[i]};
    q[s] = {p.qx[i], p.qy[i], p.qz[i]};
  }
  auto fit = try_umeyama({a, k}, {q, k}, estimate_scale);
  if (!fit) return std::nullopt;
  // A similarity fit is only a diagnostic; candidate models stay rigid.
  if (estimate_scale) {
    Eigen::Vector3d ma = Eigen::Vector3d::Zero(), mq = Eigen::Vector3d::Zero();
    for (std::size_t s = 0; s < k; ++s) {
      ma += a[s];
      mq += q[s];
    }
    fit->transform.translation = (mq - fit->transform.rotation * ma) / static_cast<double>(k);
  }
  return fit->transform;
}

struct Best {
  int inliers = -1;
  int iteration = -1;
  RigidTransform model;

  bool beaten_by(int count, int iter) const {
    return count > inliers || (count == inliers && iter < iteration);
  }
};

void inlier_stats(const CorrespondenceSet& corr, const RigidTransform& t, double threshold,
                  std::vector<int>& inliers, double& rmse) {
  inliers.clear();
  double sq_sum = 0.0;
  const double sq_threshold = threshold * threshold;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const auto& c = corr.pairs[i];
    const double d2 = (t(c.anchor_point) - c.query_point).squaredNorm();
    if (d2 < sq_threshold) {
      inliers.push_back(static_cast<int>(i));
      sq_sum += d2;
    }
  }
  rmse = inliers.empty() ? 0.0 : std::sqrt(sq_sum / static_cast<double>(inliers.size()));
}

}  // namespace

void RansacConfig::validate() const {
  if (iterations < 1) throw Error(ErrorKind::Configuration, "RANSAC needs >= 1 iteration");
  if (!(inlier_threshold > 0.0)) {
    throw Error(ErrorKind::Configuration, "RANSAC inlier threshold must be positive");
  }
  if (minimal_set_size < 3) {
    throw Error(ErrorKind::Configuration, "RANSAC minimal set size must be >= 3");
  }
}

namespace detail {

std::vector<int> minimal_sample(std::uint64_t seed, std::uint64_t iteration, int population,
                                int sample_size) {
  std::uint64_t state = seed * 0xD1B54A32D192ED03ull ^ (iteration + 0x632BE59BD9B4E019ull);
  splitmix64(state);
  std::vector<int> out;
  out.reserve(sample_size);
  while (static_cast<int>(out.size()) < sample_size) {
    const auto draw = static_cast<int>(
        (static_cast<unsigned __int128>(splitmix64(state)) * static_cast<std::uint64_t>(population)) >>
        64);
    if (std::find(out.begin(), out.end(), draw) == out.end()) out.push_back(draw);
  }
  return out;
}

int count_inliers(const CorrespondenceSet& corr, const RigidTransform& t, double threshold) {
  return score_model(PackedPairs(corr), t, threshold * threshold, -1);
}

std::optional<RigidTransform> ransac_candidate(const CorrespondenceSet& corr,
                                               const RansacConfig& config, int iteration) {
  const PackedPairs packed(corr);
  const auto sample =
      minimal_sample(config.seed, iteration, packed.size(), config.minimal_set_size);
  return fit_sample(packed, sample, config.estimate_scale);
}

}  // namespace detail

RansacReport ransac_report(const CorrespondenceSet& corr, const RansacConfig& config,
                           Execution exec) {
  config.validate();
  if (static_cast<int>(corr.size()) < config.minimal_set_size) {
    throw Error(ErrorKind::InsufficientData, "RANSAC: fewer correspondences than the minimal set");
  }

  const PackedPairs packed(corr);
  const double sq_threshold = config.inlier_threshold * config.inlier_threshold;

  auto run_iteration = [&](int iter, Best& best) {
    const auto sample =
        detail::minimal_sample(config.seed, iter, packed.size(), config.minimal_set_size);
    const auto model = fit_sample(packed, sample, config.estimate_scale);
    if (!model) return;  // degenerate sample consumes its slot
    // Iterations run in ascending order within a worker, so a later candidate
    // must strictly beat the worker's best.
    const int count = score_model(packed, *model, sq_threshold, best.inliers);
    if (count >= 0 && best.beaten_by(count, iter)) best = {count, iter, *model};
  };

  Best best;
  if (exec == Execution::Serial) {
    for (int iter = 0; iter < config.iterations; ++iter) run_iteration(iter, best);
  } else {
    std::vector<Best> per_thread(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
    {
      Best local;
#pragma omp for schedule(static)
      for (int iter = 0; iter < config.iterations; ++iter) run_iteration(iter, local);
      per_thread[static_cast<std::size_t>(omp_get_thread_num())] = local;
    }
    for (const auto& b : per_thread) {
      if (b.iteration >= 0 && (best.iteration < 0 || best.beaten_by(b.inliers, b.iteration))) {
        best = b;
      }
    }
  }

  if (best.iteration < 0 || best.inliers < config.minimal_set_size) {
    throw Error(ErrorKind::NoConsensus, "RANSAC: no model reached the minimal inlier count");
  }

  RansacReport report;
  report.best_iteration = best.iteration;
  report.best_candidate_inliers = best.inliers;

  std::vector<int> inliers;
  double rmse = 0.0;
  inlier_stats(corr, best.model, config.inlier_threshold, inliers, rmse);
  RigidTransform chosen = best.model;

  if (config.refit_on_inliers) {
    std::vector<Eigen::Vector3d> a(inliers.size()), q(inliers.size());
    for (std::size_t i = 0; i < inliers.size(); ++i) {
      a[i] = corr.pairs[inliers[i]].anchor_point;
      q[i] = corr.pairs[inliers[i]].query_point;
    }
    if (auto refit = try_umeyama(a, q, false)) {
      chosen = refit->transform;
      inlier_stats(corr, chosen, config.inlier_threshold, inliers, rmse);
      report.refit_applied = true;
    }
  }

  report.estimate.transform = chosen;
  report.estimate.inlier_count = static_cast<int>(inliers.size());
  report.estimate.inlier_rmse = rmse;
  report.estimate.refined = false;
  return report;
}

PoseEstimate ransac(const CorrespondenceSet& correspondences, const RansacConfig& config,
                    Execution exec) {
  return ransac_report(correspondences, config, exec).estimate;
}

}  // namespace conceptpose
