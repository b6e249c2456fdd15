#include <conceptpose/error.hpp>
#include <conceptpose/pose_solver.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <set>

using namespace conceptpose;
using conceptpose::testkit::quaternion_angle_deg;
using conceptpose::testkit::random_points;
using conceptpose::testkit::random_transform;

namespace {

CorrespondenceSet consistent_set(std::mt19937_64& rng, const RigidTransform& t, int inliers,
                                 int outliers, double half = 0.2) {
  CorrespondenceSet set;
  const auto a = random_points(rng, inliers + outliers, half);
  const auto junk = random_points(rng, outliers, half);
  for (int i = 0; i < inliers + outliers; ++i) {
    Correspondence c;
    c.anchor_point = a[i];
    c.query_point = i < inliers ? t(a[i]) : t(junk[i - inliers]);
    c.query_index = i;
    c.anchor_index = i;
    set.pairs.push_back(c);
  }
  return set;
}

RigidTransform conjugate(const RigidTransform& g, const RigidTransform& t) {
  return compose(compose(g, t), invert(g));
}

void expect_identical(const RansacReport& a, const RansacReport& b) {
  EXPECT_EQ(a.best_iteration, b.best_iteration);
  EXPECT_EQ(a.best_candidate_inliers, b.best_candidate_inliers);
  EXPECT_EQ(a.refit_applied, b.refit_applied);
  EXPECT_EQ(a.estimate.inlier_count, b.estimate.inlier_count);
  EXPECT_EQ(a.estimate.inlier_rmse, b.estimate.inlier_rmse);
  EXPECT_TRUE(a.estimate.transform.rotation == b.estimate.transform.rotation);
  EXPECT_TRUE(a.estimate.transform.translation == b.estimate.transform.translation);
}

}  // namespace

TEST(RansacConfig, Validation) {
  RansacConfig c;
  EXPECT_NO_THROW(c.validate());
  c.iterations = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.inlier_threshold = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.minimal_set_size = 2;
  EXPECT_THROW(c.validate(), Error);
}

TEST(MinimalSample, DistinctInRangeAndDeterministic) {
  for (std::uint64_t it = 0; it < 500; ++it) {
    const auto s = detail::minimal_sample(42, it, 10, 3);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 3u);
    for (int v : s) {
      EXPECT_GE(v, 0);
      EXPECT_LT(v, 10);
    }
    EXPECT_EQ(s, detail::minimal_sample(42, it, 10, 3));
  }
  EXPECT_NE(detail::minimal_sample(42, 0, 1000, 3), detail::minimal_sample(43, 0, 1000, 3));
  EXPECT_NE(detail::minimal_sample(42, 0, 1000, 3), detail::minimal_sample(42, 1, 1000, 3));
}

TEST(MinimalSample, RoughlyUniform) {
  std::vector<int> hist(10, 0);
  for (std::uint64_t it = 0; it < 20000; ++it) {
    for (int v : detail::minimal_sample(7, it, 10, 3)) ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 6000, 400);
}

TEST(Ransac, ExactDataRecovered) {
  std::mt19937_64 rng(1);
  const auto t = random_transform(rng, 0.3);
  const auto set = consistent_set(rng, t, 200, 0);
  RansacConfig c;
  c.iterations = 200;
  const auto e = ransac(set, c);
  EXPECT_LT(quaternion_angle_deg(e.transform.rotation, t.rotation), 1e-4);
  EXPECT_LT((e.transform.translation - t.translation).norm(), 1e-6);
  EXPECT_EQ(e.inlier_count, 200);
  EXPECT_FALSE(e.refined);
}

TEST(Ransac, MinimalConsistentSet) {
  std::mt19937_64 rng(2);
  const auto set = consistent_set(rng, random_transform(rng, 0.3), 3, 0);
  RansacConfig c;
  c.iterations = 1;
  EXPECT_EQ(ransac(set, c).inlier_count, 3);
}

TEST(Ransac, HalfOutliers) {
  std::mt19937_64 rng(3);
  const auto t = random_transform(rng, 0.3);
  const auto set = consistent_set(rng, t, 1000, 1000);
  RansacConfig c;
  c.iterations = 2000;
  const auto e = ransac(set, c);
  EXPECT_LT(quaternion_angle_deg(e.transform.rotation, t.rotation), 0.1);
  EXPECT_LT((e.transform.translation - t.translation).norm(), 1e-3);
  EXPECT_GE(e.inlier_count, 1000);
  EXPECT_LE(e.inlier_count, 2000);
}

TEST(Ransac, SerialAndParallelIdentical) {
  std::mt19937_64 rng(4);
  const auto set = consistent_set(rng, random_transform(rng, 0.3), 300, 700);
  RansacConfig c;
  c.iterations = 3000;
  const auto a = ransac_report(set, c, Execution::Serial);
  const auto b = ransac_report(set, c, Execution::Parallel);
  const auto d = ransac_report(set, c, Execution::Parallel);
  expect_identical(a, b);
  expect_identical(b, d);
}

TEST(Ransac, WinnerIsMaximalWithLowestIteration) {
  std::mt19937_64 rng(5);
  const auto set = consistent_set(rng, random_transform(rng, 0.3), 40, 60);
  RansacConfig c;
  c.iterations = 300;
  c.refit_on_inliers = false;
  int best = -1, best_iter = -1;
  for (int it = 0; it < c.iterations; ++it) {
    const auto m = detail::ransac_candidate(set, c, it);
    if (!m) continue;
    const int n = detail::count_inliers(set, *m, c.inlier_threshold);
    if (n > best) {
      best = n;
      best_iter = it;
    }
  }
  const auto r = ransac_report(set, c, Execution::Serial);
  EXPECT_EQ(r.best_candidate_inliers, best);
  EXPECT_EQ(r.best_iteration, best_iter);
  EXPECT_EQ(r.estimate.inlier_count, best);
  EXPECT_FALSE(r.refit_applied);
}

TEST(Ransac, RefitIsLeastSquaresOnWinningConsensus) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.003);
  auto set = consistent_set(rng, random_transform(rng, 0.3), 300, 300);
  for (auto& p : set.pairs) p.query_point += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
  RansacConfig c;
  c.iterations = 500;
  const auto r = ransac_report(set, c);
  ASSERT_TRUE(r.refit_applied);
  const auto winner = detail::ransac_candidate(set, c, r.best_iteration);
  ASSERT_TRUE(winner.has_value());
  std::vector<Eigen::Vector3d> a, q;
  for (const auto& p : set.pairs) {
    if (((*winner)(p.anchor_point) - p.query_point).norm() < c.inlier_threshold) {
      a.push_back(p.anchor_point);
      q.push_back(p.query_point);
    }
  }
  ASSERT_EQ(static_cast<int>(a.size()), r.best_candidate_inliers);
  const auto fit = umeyama(a, q, false);
  EXPECT_LT(quaternion_angle_deg(r.estimate.transform.rotation, fit.transform.rotation), 1e-9);
  EXPECT_LT((r.estimate.transform.translation - fit.transform.translation).norm(), 1e-12);
  EXPECT_EQ(r.estimate.inlier_count,
            detail::count_inliers(set, r.estimate.transform, c.inlier_threshold));
  EXPECT_LE(r.estimate.inlier_rmse, c.inlier_threshold);
}

TEST(Ransac, Equivariance) {
  std::mt19937_64 rng(7);
  const auto t = random_transform(rng, 0.3);
  const auto g = random_transform(rng, 0.3);
  const auto set = consistent_set(rng, t, 100, 0);
  CorrespondenceSet moved = set;
  for (auto& p : moved.pairs) {
    p.anchor_point = g(p.anchor_point);
    p.query_point = g(p.query_point);
  }
  RansacConfig c;
  c.iterations = 50;
  const auto e = ransac(moved, c);
  const auto expect = conjugate(g, t);
  EXPECT_LT(quaternion_angle_deg(e.transform.rotation, expect.rotation), 1e-6);
  EXPECT_LT((e.transform.translation - expect.translation).norm(), 1e-6);
}

TEST(Ransac, TooFewCorrespondences) {
  std::mt19937_64 rng(8);
  const auto set = consistent_set(rng, RigidTransform::identity(), 2, 0);
  try {
    ransac(set, RansacConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
  }
}

TEST(Ransac, NoConsensusOnDegenerateData) {
  CorrespondenceSet set;
  for (int i = 0; i < 10; ++i) {
    Correspondence c;
    c.anchor_point = Eigen::Vector3d(i, i, i);
    c.query_point = Eigen::Vector3d(i, 2 * i, 0);
    set.pairs.push_back(c);
  }
  RansacConfig c;
  c.iterations = 100;
  try {
    ransac(set, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConsensus);
  }
}
