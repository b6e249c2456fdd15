#include <conceptpose/pipeline.hpp>

#include <chrono>
#include <type_traits>
#include <utility>

namespace conceptpose {

std::size_t PipelineConfig::resolved_max_correspondences() const {
  if (max_correspondences) return *max_correspondences;
  return voxelize ? 5'000 : 10'000;
}

RansacConfig PipelineConfig::resolved_ransac() const {
  RansacConfig r;
  r.iterations = ransac_iterations.value_or(voxelize ? 50'000 : 100'000);
  r.inlier_threshold = inlier_threshold;
  r.seed = seed;
  r.estimate_scale = estimate_scale;
  return r;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Configuration, what); };
  if (!(temperature > 0.0)) fail("temperature must be positive");
  if (resolution < 2) fail("voxel resolution must be at least 2");
  if (filter.k < 1) fail("k must be at least 1");
  if (!(filter.std_ratio >= 0.0)) fail("std_ratio must be non-negative");
  if (!(filter.sigma_mult >= 0.0)) fail("sigma_mult must be non-negative");
  if (resolved_max_correspondences() == 0) fail("max_correspondences must be positive");
  if (icp_config.max_iterations < 0) fail("ICP iterations must be non-negative");
  resolved_ransac().validate();
}

double PipelineDiagnostics::seconds(const std::string& stage) const {
  for (const auto& t : timings) {
    if (t.stage == stage) return t.seconds;
  }
  return 0.0;
}

PipelineError::PipelineError(std::string stage, const Error& cause)
    : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}

namespace {

class StageRunner {
 public:
  explicit StageRunner(PipelineDiagnostics& diag) : diag_(diag) {}

  template <typename F>
  auto operator()(const std::string& stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record(stage, start);
      } else {
        auto out = body();
        record(stage, start);
        return out;
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const Error& e) {
      throw PipelineError(stage, e);
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    for (auto& t : diag_.timings) {
      if (t.stage == stage) {
        t.seconds += dt.count();
        return;
      }
    }
    diag_.timings.push_back({stage, dt.count()});
  }

  PipelineDiagnostics& diag_;
};

struct PreparedCloud {
  ConceptPointCloud filtered;
  ConceptPointCloud matched;
};

ConceptPointCloud apply_filters(const ConceptPointCloud& cloud, const PipelineConfig& config,
                                CloudCounts& counts, StageRunner& run) {
  auto local = run("local_filter", [&] {
    return local_outlier_filter(cloud, config.filter.k, config.filter.std_ratio,
                                config.execution);
  });
  counts.after_local = local.size();
  auto global = run("global_filter",
                    [&] { return global_outlier_filter(local, config.filter.sigma_mult); });
  counts.after_global = global.size();
  return global;
}

PreparedCloud prepare(const FrameInput& input, const PipelineConfig& config, CloudCounts& counts,
                      StageRunner& run) {
  auto raw = run("backproject", [&] {
    return build_cloud(input.frame, input.saliency, config.temperature, config.execution);
  });
  counts.backprojected = raw.size();

  PreparedCloud out;
  if (!config.voxelize) {
    out.filtered = apply_filters(raw, config, counts, run);
    out.matched = out.filtered;
  } else if (config.filter_before_voxelize) {
    out.filtered = apply_filters(raw, config, counts, run);
    out.matched = run("voxelize", [&] { return voxelize(out.filtered, config.resolution).cloud; });
  } else {
    auto vox = run("voxelize", [&] { return voxelize(raw, config.resolution).cloud; });
    out.matched = apply_filters(vox, config, counts, run);
    out.filtered = std::move(raw);
  }
  counts.matched = out.matched.size();
  return out;
}

}  // namespace

PipelineResult estimate_relative_pose(const FrameInput& anchor, const FrameInput& query,
                                      const PipelineConfig& config) {
  PipelineResult result;
  auto& diag = result.diagnostics;
  StageRunner run(diag);

  run("configuration", [&] { config.validate(); });

  const PreparedCloud a = prepare(anchor, config, diag.anchor, run);
  const PreparedCloud q = prepare(query, config, diag.query, run);

  const CorrespondenceSet corr = run("correspondence", [&] {
    if (a.matched.labels != q.matched.labels) {
      throw Error(ErrorKind::Configuration, "anchor and query concept labels differ");
    }
    return match(q.matched, a.matched, config.measure, config.resolved_max_correspondences(),
                 config.seed, config.execution);
  });
  diag.correspondences = corr.size();

  const RansacReport report =
      run("ransac", [&] { return ransac_report(corr, config.resolved_ransac(), config.execution); });
  diag.ransac_inliers = report.estimate.inlier_count;
  diag.best_iteration = report.best_iteration;
  diag.refit_applied = report.refit_applied;
  result.estimate = report.estimate;

  if (config.icp) {
    const auto& ac = config.icp_cloud == IcpCloud::Filtered ? a.filtered : a.matched;
    const auto& qc = config.icp_cloud == IcpCloud::Filtered ? q.filtered : q.matched;
    const IcpResult icp = run("icp", [&] {
      return icp_refine_traced(result.estimate, ac.points, qc.points, config.icp_config,
                               config.execution);
    });
    result.estimate = icp.estimate;
    diag.icp_iterations = icp.iterations;
    diag.icp_rmse = icp.rmse_history.empty() ? 0.0 : icp.rmse_history.back();
  }
  return result;
}

RigidTransform compose_absolute(const PoseEstimate& estimate,
                                const RigidTransform& anchor_object_pose) {
  return compose(estimate.transform, anchor_object_pose);
}

}  // namespace conceptpose
