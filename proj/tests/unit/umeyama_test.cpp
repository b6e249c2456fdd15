#include <conceptpose/error.hpp>
#include <conceptpose/pose_solver.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <Eigen/SVD>

using namespace conceptpose;
using conceptpose::testkit::quaternion_angle_deg;
using conceptpose::testkit::random_points;
using conceptpose::testkit::random_transform;

namespace {

std::vector<Eigen::Vector3d> transformed(const RigidTransform& t, const std::vector<Eigen::Vector3d>& p,
                                   double scale = 1.0) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& x : p) out.push_back(scale * (t.rotation * x) + t.translation);
  return out;
}

double sum_sq_residual(const RigidTransform& t, const std::vector<Eigen::Vector3d>& a,
                const std::vector<Eigen::Vector3d>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (t(a[i]) - q[i]).squaredNorm();
  return s;
}

}  // namespace

TEST(Umeyama, IdenticalSetsGiveIdentity) {
  std::mt19937_64 rng(1);
  const auto a = random_points(rng, 20);
  const auto r = umeyama(a, a);
  EXPECT_LT((r.transform.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LT(r.transform.translation.norm(), 1e-12);
  EXPECT_DOUBLE_EQ(r.scale, 1.0);
}

TEST(Umeyama, PureTranslation) {
  std::mt19937_64 rng(2);
  const auto a = random_points(rng, 10);
  const auto q = transformed(RigidTransform::from_translation({1, 2, 3}), a);
  const auto r = umeyama(a, q);
  EXPECT_LT((r.transform.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  EXPECT_LT((r.transform.translation - Eigen::Vector3d(1, 2, 3)).norm(), 1e-9);
}

TEST(Umeyama, QuarterTurnOnFourPoints) {
  const std::vector<Eigen::Vector3d> a = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const RigidTransform g = RigidTransform::from_rotation(rot_z(90));
  const auto r = umeyama(a, transformed(g, a));
  EXPECT_LT(quaternion_angle_deg(r.transform.rotation, g.rotation), 1e-9);
  EXPECT_LT(r.transform.translation.norm(), 1e-9);
}

TEST(Umeyama, RecoversRandomTransforms) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_transform(rng);
    const auto a = random_points(rng, 3 + trial % 20);
    const auto r = umeyama(a, transformed(g, a));
    EXPECT_LT(quaternion_angle_deg(r.transform.rotation, g.rotation), 1e-6);
    EXPECT_LT((r.transform.translation - g.translation).norm(), 1e-9);
    EXPECT_TRUE(r.transform.is_valid(1e-9));
  }
}

TEST(Umeyama, ReflectionIsCorrected) {
  std::mt19937_64 rng(4);
  const auto a = random_points(rng, 30);
  std::vector<Eigen::Vector3d> q;
  for (const auto& p : a) q.emplace_back(-p.x(), p.y(), p.z());
  const auto r = umeyama(a, q);
  EXPECT_NEAR(r.transform.rotation.determinant(), 1.0, 1e-9);
}

TEST(Umeyama, ScaleEstimation) {
  std::mt19937_64 rng(5);
  const auto g = random_transform(rng);
  const auto a = random_points(rng, 25);
  const auto q = transformed(g, a, 1.7);
  const auto r = umeyama(a, q, true);
  EXPECT_NEAR(r.scale, 1.7, 1e-9);
  EXPECT_LT(quaternion_angle_deg(r.transform.rotation, g.rotation), 1e-6);
  EXPECT_LT((r.transform.translation - g.translation).norm(), 1e-9);
}

TEST(Umeyama, CollinearPointsAreDegenerate) {
  const std::vector<Eigen::Vector3d> a = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  try {
    umeyama(a, a);
    FAIL() << "expected a degenerate-sample error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSample);
  }
  EXPECT_FALSE(try_umeyama(a, a).has_value());
}

TEST(Umeyama, TooFewPointsAreDegenerate) {
  const std::vector<Eigen::Vector3d> a = {{0, 0, 0}, {1, 0, 0}};
  EXPECT_FALSE(try_umeyama(a, a).has_value());
}

TEST(Umeyama, NeverWorseThanIdentityOnCenteredData) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_points(rng, 12);
    auto q = transformed(random_transform(rng), a);
    for (auto& p : q) p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    Eigen::Vector3d ca = Eigen::Vector3d::Zero(), cq = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < a.size(); ++i) {
      ca += a[i];
      cq += q[i];
    }
    ca /= a.size();
    cq /= q.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] -= ca;
      q[i] -= cq;
    }
    const auto r = umeyama(a, q);
    EXPECT_LE(sum_sq_residual(r.transform, a, q), sum_sq_residual(RigidTransform::identity(), a, q) + 1e-12);
  }
}

TEST(Umeyama, MatchesBruteForceOptimumOnNoisyData) {
  // The optimal rotation maximizes trace(R^T H); no random rotation may beat it.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.05);
  auto a = random_points(rng, 15);
  auto q = transformed(random_transform(rng), a);
  for (auto& p : q) p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
  const auto r = umeyama(a, q);
  const double best = sum_sq_residual(r.transform, a, q);
  for (int k = 0; k < 2000; ++k) {
    auto g = random_transform(rng, 0.0);
    Eigen::Vector3d ca = Eigen::Vector3d::Zero(), cq = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < a.size(); ++i) {
      ca += a[i];
      cq += q[i];
    }
    g.translation = (cq - g.rotation * ca) / static_cast<double>(a.size());
    EXPECT_GE(sum_sq_residual(g, a, q), best - 1e-12);
  }
}
