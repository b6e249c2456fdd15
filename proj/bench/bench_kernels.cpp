/**
 * @file bench_kernels.cpp
 * @brief Serial vs parallel timings of the OpenMP kernels.
 */
#include <conceptpose/concept_cloud.hpp>
#include <conceptpose/correspondence.hpp>
#include <conceptpose/filtering.hpp>
#include <conceptpose/pose_solver.hpp>
#include <conceptpose/renderer.hpp>
#include <conceptpose/synth.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace conceptpose;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

const SyntheticPair& cup_pair() {
  static const SyntheticPair pair = make_pair(make_object(ObjectKind::CupWithHandle, 0.12),
                                              RigidTransform{rot_y(30), {0, 0, 0.05}},
                                              default_intrinsics(), {}, 42);
  return pair;
}

const ConceptPointCloud& cloud(bool anchor) {
  static const ConceptPointCloud a =
      build_cloud(cup_pair().anchor.frame, cup_pair().anchor.saliency, 0.1);
  static const ConceptPointCloud q =
      build_cloud(cup_pair().query.frame, cup_pair().query.saliency, 0.1);
  return anchor ? a : q;
}

CorrespondenceSet half_outliers(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const RigidTransform g{rot_y(30), {0.01, -0.02, 0.05}};
  CorrespondenceSet set;
  for (std::size_t i = 0; i < n; ++i) {
    Correspondence c;
    c.anchor_point = {u(rng), u(rng), u(rng)};
    c.query_point = i % 2 == 0 ? g(c.anchor_point) : Eigen::Vector3d(u(rng), u(rng), u(rng));
    set.pairs.push_back(c);
  }
  return set;
}

void BM_BuildCloud(benchmark::State& state) {
  const auto& v = cup_pair().anchor;
  for (auto _ : state) benchmark::DoNotOptimize(build_cloud(v.frame, v.saliency, 0.1, mode(state)));
}

void BM_LocalFilter(benchmark::State& state) {
  const auto& c = cloud(true);
  for (auto _ : state) benchmark::DoNotOptimize(local_outlier_indices(c, 20, 2.0, mode(state)));
}

void BM_Match(benchmark::State& state) {
  const auto& a = cloud(true);
  const auto& q = cloud(false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        match(q, a, SimilarityMeasure::ForwardKl, 10'000, 42, mode(state)));
  }
}

void BM_Ransac(benchmark::State& state) {
  const auto set = half_outliers(2000);
  RansacConfig cfg;
  cfg.iterations = 10'000;
  for (auto _ : state) benchmark::DoNotOptimize(ransac(set, cfg, mode(state)));
}

void BM_Icp(benchmark::State& state) {
  const auto& a = cloud(true);
  const auto& q = cloud(false);
  PoseEstimate start;
  start.transform = RigidTransform{rot_y(31), {0.002, 0.0, 0.05}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(icp_refine(start, a.points, q.points, IcpConfig{}, mode(state)));
  }
}

void BM_Render(benchmark::State& state) {
  static const auto obj = make_object(ObjectKind::CupWithHandle, 0.12);
  const auto pose = canonical_anchor_pose();
  const auto k = default_intrinsics();
  for (auto _ : state) benchmark::DoNotOptimize(render_depth(obj.model, pose, k, mode(state)));
}

}  // namespace

// Argument 0 runs the serial reference path, 1 the OpenMP path.
BENCHMARK(BM_BuildCloud)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalFilter)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Match)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ransac)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Icp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
