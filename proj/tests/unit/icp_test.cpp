#include <conceptpose/error.hpp>
#include <conceptpose/pose_solver.hpp>
#include <conceptpose/synth.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace conceptpose;
using conceptpose::testkit::quaternion_angle_deg;

namespace {

/// Dense sampling of a smooth closed surface (ellipsoid with a bump), 10 cm scale.
std::vector<Eigen::Vector3d> surface_cloud(int nu, int nv) {
  std::vector<Eigen::Vector3d> out;
  for (int i = 0; i < nu; ++i) {
    for (int j = 1; j < nv; ++j) {
      const double th = 2.0 * EIGEN_PI * i / nu;
      const double ph = EIGEN_PI * j / nv;
      const double r = 1.0 + 0.3 * std::exp(-std::pow(th - 1.0, 2) * 4 - std::pow(ph - 1.2, 2) * 4);
      out.emplace_back(0.06 * r * std::sin(ph) * std::cos(th), 0.04 * r * std::sin(ph) * std::sin(th),
                       0.05 * r * std::cos(ph));
    }
  }
  return out;
}

std::vector<Eigen::Vector3d> transformed(const RigidTransform& t, const std::vector<Eigen::Vector3d>& p) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& x : p) out.push_back(t(x));
  return out;
}

}  // namespace

TEST(Icp, ExactEstimateIsFixedPoint) {
  const auto a = surface_cloud(60, 40);
  const RigidTransform t{rot_y(20), {0.01, 0.02, 0.5}};
  const auto q = transformed(t, a);
  PoseEstimate in{t, 0, 0.0, false};
  const auto out = icp_refine(in, a, q, IcpConfig{});
  EXPECT_TRUE(out.refined);
  EXPECT_LT((out.transform.rotation - t.rotation).norm(), 1e-9);
  EXPECT_LT((out.transform.translation - t.translation).norm(), 1e-9);
  EXPECT_EQ(out.inlier_count, static_cast<int>(a.size()));
}

TEST(Icp, ConvergesFromSmallPerturbation) {
  const auto a = make_object(ObjectKind::CupWithHandle, 0.12).model.vertices;
  const RigidTransform t{rot_y(20) * rot_x(-10), {0.01, 0.02, 0.5}};
  const auto q = transformed(t, a);
  const RigidTransform delta{rot_axis(Eigen::Vector3d(1, 2, 3).normalized(), 2.0),
                             Eigen::Vector3d(3, -4, 0).normalized() * 0.005};
  PoseEstimate in{compose(delta, t), 0, 0.0, false};
  const auto r = icp_refine_traced(in, a, q, IcpConfig{});
  EXPECT_TRUE(r.estimate.refined);
  EXPECT_LT(quaternion_angle_deg(r.estimate.transform.rotation, t.rotation), 0.1);
  EXPECT_LT((r.estimate.transform.translation - t.translation).norm(), 5e-4);
}

TEST(Icp, RmseHistoryIsMonotone) {
  const auto a = surface_cloud(80, 50);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.001);
  auto q = transformed(RigidTransform{rot_z(15), {0.0, 0.0, 0.4}}, a);
  for (auto& p : q) p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
  PoseEstimate in{RigidTransform{rot_z(12), {0.003, 0.0, 0.4}}, 0, 0.0, false};
  const auto r = icp_refine_traced(in, a, q, IcpConfig{});
  ASSERT_GE(r.rmse_history.size(), 2u);
  for (std::size_t i = 1; i < r.rmse_history.size(); ++i) {
    EXPECT_LE(r.rmse_history[i], r.rmse_history[i - 1]);
  }
  EXPECT_LE(r.estimate.inlier_rmse, r.rmse_history.front());
  EXPECT_DOUBLE_EQ(r.estimate.inlier_rmse, r.rmse_history.back());
}

TEST(Icp, DisjointCloudsReturnInput) {
  const auto a = surface_cloud(30, 20);
  const auto q = transformed(RigidTransform::from_translation({1.0, 0, 0}), a);
  PoseEstimate in{RigidTransform::identity(), 7, 0.002, false};
  const auto out = icp_refine(in, a, q, IcpConfig{});
  EXPECT_FALSE(out.refined);
  EXPECT_EQ(out.inlier_count, 7);
  EXPECT_TRUE(out.transform.rotation == in.transform.rotation);
  EXPECT_TRUE(out.transform.translation == in.transform.translation);
}

TEST(Icp, SerialAndParallelIdentical) {
  const auto a = surface_cloud(80, 50);
  const auto q = transformed(RigidTransform{rot_z(15), {0.0, 0.0, 0.4}}, a);
  PoseEstimate in{RigidTransform{rot_z(13), {0.002, 0.0, 0.4}}, 0, 0.0, false};
  const auto s = icp_refine_traced(in, a, q, IcpConfig{}, Execution::Serial);
  const auto p = icp_refine_traced(in, a, q, IcpConfig{}, Execution::Parallel);
  EXPECT_EQ(s.rmse_history, p.rmse_history);
  EXPECT_TRUE(s.estimate.transform.rotation == p.estimate.transform.rotation);
  EXPECT_TRUE(s.estimate.transform.translation == p.estimate.transform.translation);
}

TEST(Icp, EmptyCloudsRejected) {
  const std::vector<Eigen::Vector3d> empty;
  const auto a = surface_cloud(10, 10);
  EXPECT_THROW(icp_refine(PoseEstimate{}, empty, a, IcpConfig{}), Error);
  EXPECT_THROW(icp_refine(PoseEstimate{}, a, empty, IcpConfig{}), Error);
}
