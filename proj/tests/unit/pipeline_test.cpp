#include <conceptpose/filtering.hpp>
#include <conceptpose/pipeline.hpp>
#include <conceptpose/pose_solver.hpp>
#include <conceptpose/synth.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace conceptpose;
using conceptpose::testkit::random_transform;

namespace {

PipelineConfig quick_config() {
  PipelineConfig c;
  c.max_correspondences = 3000;
  c.ransac_iterations = 5000;
  return c;
}

const SyntheticPair& cup_pair() {
  static const SyntheticPair pair = make_pair(make_object(ObjectKind::CupWithHandle, 0.12),
                                              RigidTransform{rot_y(30), {0, 0, 0.05}},
                                              default_intrinsics(), {}, 42);
  return pair;
}

PipelineResult run(const SyntheticView& a, const SyntheticView& q, const PipelineConfig& c) {
  return estimate_relative_pose({a.frame, a.saliency}, {q.frame, q.saliency}, c);
}

}  // namespace

TEST(PipelineConfig, BudgetsFollowVoxelFlag) {
  PipelineConfig c;
  EXPECT_EQ(c.resolved_max_correspondences(), 10'000u);
  EXPECT_EQ(c.resolved_ransac().iterations, 100'000);
  c.voxelize = true;
  EXPECT_EQ(c.resolved_max_correspondences(), 5'000u);
  EXPECT_EQ(c.resolved_ransac().iterations, 50'000);
  c.max_correspondences = 123;
  c.ransac_iterations = 45;
  EXPECT_EQ(c.resolved_max_correspondences(), 123u);
  EXPECT_EQ(c.resolved_ransac().iterations, 45);
  EXPECT_EQ(c.resolved_ransac().seed, 42u);
  EXPECT_EQ(c.resolved_ransac().inlier_threshold, 0.01);
}

TEST(PipelineConfig, Validation) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.temperature = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.resolution = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.inlier_threshold = -1.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Pipeline, SelfPairIsIdentity) {
  const auto& p = cup_pair();
  const auto r = run(p.anchor, p.anchor, quick_config());
  EXPECT_LT(rotation_angle_deg(r.estimate.transform, RigidTransform::identity()), 0.01);
  EXPECT_LT(r.estimate.transform.translation.norm(), 1e-4);
}

TEST(Pipeline, CleanCupPairRecovered) {
  const auto& p = cup_pair();
  const auto r = run(p.anchor, p.query, PipelineConfig{});
  EXPECT_LT(rotation_angle_deg(r.estimate.transform, p.relative), 0.2);
  EXPECT_LT(translation_error(r.estimate.transform, p.relative), 1e-3);
  EXPECT_TRUE(r.estimate.refined);
}

TEST(Pipeline, DiagnosticsAreConsistent) {
  const auto& p = cup_pair();
  const auto r = run(p.anchor, p.query, quick_config());
  const auto& d = r.diagnostics;
  for (const auto* c : {&d.anchor, &d.query}) {
    EXPECT_GT(c->backprojected, 0u);
    EXPECT_LE(c->after_local, c->backprojected);
    EXPECT_LE(c->after_global, c->after_local);
    EXPECT_EQ(c->matched, c->after_global);
  }
  EXPECT_EQ(d.correspondences, std::min<std::size_t>(3000, d.query.matched));
  EXPECT_LE(d.ransac_inliers, static_cast<int>(d.correspondences));
  EXPECT_GE(d.best_iteration, 0);
  const std::vector<std::string> order = {"configuration", "backproject", "local_filter",
                                          "global_filter", "correspondence", "ransac", "icp"};
  ASSERT_EQ(d.timings.size(), order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(d.timings[i].stage, order[i]);
    EXPECT_GE(d.timings[i].seconds, 0.0);
  }
  EXPECT_GE(d.seconds("ransac"), 0.0);
}

TEST(Pipeline, DeterministicAcrossRunsAndExecution) {
  const auto& p = cup_pair();
  auto c = quick_config();
  const auto a = run(p.anchor, p.query, c);
  const auto b = run(p.anchor, p.query, c);
  c.execution = Execution::Serial;
  const auto s = run(p.anchor, p.query, c);
  for (const auto* x : {&b, &s}) {
    EXPECT_TRUE(a.estimate.transform.rotation == x->estimate.transform.rotation);
    EXPECT_TRUE(a.estimate.transform.translation == x->estimate.transform.translation);
    EXPECT_EQ(a.estimate.inlier_count, x->estimate.inlier_count);
    EXPECT_EQ(a.diagnostics.best_iteration, x->diagnostics.best_iteration);
  }
}

TEST(Pipeline, FrameSwapIsInverse) {
  const auto& p = cup_pair();
  const auto fwd = run(p.anchor, p.query, quick_config());
  const auto back = run(p.query, p.anchor, quick_config());
  const auto inv = invert(back.estimate.transform);
  EXPECT_LT(rotation_angle_deg(inv, fwd.estimate.transform), 0.5);
  EXPECT_LT(translation_error(inv, fwd.estimate.transform), 2e-3);
}

TEST(Pipeline, VoxelizedRunStaysClose) {
  const auto& p = cup_pair();
  auto c = quick_config();
  const auto dense = run(p.anchor, p.query, c);
  c.voxelize = true;
  const auto vox = run(p.anchor, p.query, c);
  EXPECT_LT(rotation_angle_deg(vox.estimate.transform, dense.estimate.transform), 0.5);
  EXPECT_LT(translation_error(vox.estimate.transform, dense.estimate.transform), 2e-3);
  EXPECT_LT(vox.diagnostics.query.matched, vox.diagnostics.query.after_global);
  EXPECT_GE(vox.diagnostics.seconds("voxelize"), 0.0);
}

TEST(Pipeline, LabelMismatchNamesStage) {
  const auto& p = cup_pair();
  SaliencyTensor renamed = p.query.saliency;
  renamed.labels.back() = "something else";
  try {
    estimate_relative_pose({p.anchor.frame, p.anchor.saliency}, {p.query.frame, renamed},
                           quick_config());
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "correspondence");
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    EXPECT_EQ(std::string(e.what()).rfind("correspondence: ", 0), 0u);
  }
}

TEST(Pipeline, EmptyMaskIsDegenerateFrame) {
  const auto& p = cup_pair();
  Frame blank = p.query.frame;
  std::fill(blank.mask.data().begin(), blank.mask.data().end(), 0);
  try {
    estimate_relative_pose({p.anchor.frame, p.anchor.saliency}, {blank, p.query.saliency},
                           quick_config());
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateFrame);
    EXPECT_FALSE(e.stage().empty());
  }
}

TEST(Pipeline, IcpCanBeDisabled) {
  const auto& p = cup_pair();
  auto c = quick_config();
  c.icp = false;
  const auto r = run(p.anchor, p.query, c);
  EXPECT_FALSE(r.estimate.refined);
  EXPECT_EQ(r.diagnostics.icp_iterations, 0);
  EXPECT_EQ(r.estimate.inlier_count, r.diagnostics.ransac_inliers);
  // Refining the ICP-free estimate on independently filtered clouds reproduces
  // the default run.
  auto filtered = [&](const SyntheticView& v) {
    const auto raw = build_cloud(v.frame, v.saliency, c.temperature);
    return global_outlier_filter(local_outlier_filter(raw, c.filter.k, c.filter.std_ratio),
                                 c.filter.sigma_mult);
  };
  const auto fa = filtered(p.anchor);
  const auto fq = filtered(p.query);
  const auto refined = icp_refine(r.estimate, fa.points, fq.points, c.icp_config);
  auto with_icp = c;
  with_icp.icp = true;
  const auto full = run(p.anchor, p.query, with_icp);
  EXPECT_TRUE(full.estimate.transform.rotation == refined.transform.rotation);
  EXPECT_TRUE(full.estimate.transform.translation == refined.transform.translation);
  EXPECT_LT(rotation_angle_deg(r.estimate.transform, p.relative), 5.0);
}

TEST(ComposeAbsolute, MatchesDirectComposition) {
  std::mt19937_64 rng(3);
  const auto anchor = random_transform(rng);
  PoseEstimate e;
  EXPECT_TRUE(compose_absolute(e, anchor).rotation.isApprox(anchor.rotation, 0.0));
  e.transform = RigidTransform::from_translation({0.1, 0.2, 0.3});
  EXPECT_LT((compose_absolute(e, anchor).translation - (anchor.translation + Eigen::Vector3d(0.1, 0.2, 0.3))).norm(), 1e-15);
  e.transform = random_transform(rng);
  const auto got = compose_absolute(e, anchor);
  const Eigen::Matrix3d r = e.transform.rotation * anchor.rotation;
  const Eigen::Vector3d t = e.transform.rotation * anchor.translation + e.transform.translation;
  EXPECT_LT((got.rotation - r).norm(), 1e-14);
  EXPECT_LT((got.translation - t).norm(), 1e-14);
}
