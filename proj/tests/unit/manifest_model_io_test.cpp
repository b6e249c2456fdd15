#include <conceptpose/error.hpp>
#include <conceptpose/io/manifest.hpp>
#include <conceptpose/io/model_io.hpp>
#include <conceptpose/synth.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <fstream>

using namespace conceptpose;
using conceptpose::testkit::random_transform;
using conceptpose::testkit::TempDir;

namespace {

io::PairManifestEntry entry(const std::string& id) {
  io::PairManifestEntry e;
  e.pair_id = id;
  e.anchor = {"scene", id + "_a"};
  e.query = {"scene", id + "_q"};
  e.object_id = "mug";
  e.category = "mug";
  return e;
}

std::string error_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Manifest, PoseNumbersAreRowMajor) {
  const RigidTransform t{rot_z(90), {1, 2, 3}};
  const auto n = io::pose_to_numbers(t);
  ASSERT_EQ(n.size(), 12u);
  EXPECT_NEAR(n[1], -1.0, 1e-15);  // R(0,1) of a quarter turn about z
  EXPECT_NEAR(n[3], 1.0, 1e-15);   // R(1,0)
  EXPECT_EQ(n[9], 1.0);
  EXPECT_EQ(n[11], 3.0);
  const auto back = io::pose_from_numbers(n);
  EXPECT_TRUE(back.rotation == t.rotation);
  EXPECT_TRUE(back.translation == t.translation);
  EXPECT_THROW(io::pose_from_numbers({1, 2, 3}), Error);
  std::vector<double> scaled = n;
  scaled[0] = 2.0;
  EXPECT_THROW(io::pose_from_numbers(scaled), Error);
}

TEST(Manifest, RoundTripWithOptionalPoses) {
  TempDir dir("manifest");
  std::mt19937_64 rng(1);
  std::vector<io::PairManifestEntry> entries = {entry("p0"), entry("p1")};
  entries[0].anchor_pose = random_transform(rng);
  entries[0].query_pose = random_transform(rng);
  io::write_manifest(dir.path() / "m.jsonl", entries);
  const auto back = io::read_manifest(dir.path() / "m.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pair_id, "p0");
  EXPECT_EQ(back[1].anchor.frame_id, "p1_a");
  EXPECT_EQ(back[1].query.scene_id, "scene");
  ASSERT_TRUE(back[0].anchor_pose.has_value());
  EXPECT_TRUE(back[0].anchor_pose->rotation == entries[0].anchor_pose->rotation);
  EXPECT_TRUE(back[0].query_pose->translation == entries[0].query_pose->translation);
  EXPECT_FALSE(back[1].anchor_pose.has_value());
}

TEST(Manifest, BlankLinesSkippedAndErrorsNameLine) {
  TempDir dir("manifest_err");
  const auto path = dir.path() / "m.jsonl";
  {
    std::ofstream out(path);
    out << "\n"
        << R"({"pair_id":"a","anchor":{"scene_id":"s","frame_id":"x"},"query":{"scene_id":"s","frame_id":"y"},"object_id":"o"})"
        << "\n\n{not json}\n";
  }
  const auto msg = error_message([&] { io::read_manifest(path); });
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  {
    std::ofstream out(path);
    out << R"({"pair_id":"","anchor":{"scene_id":"s","frame_id":"x"},"query":{"scene_id":"s","frame_id":"y"},"object_id":"o"})"
        << "\n";
  }
  EXPECT_THROW(io::read_manifest(path), Error);
  EXPECT_THROW(io::read_manifest(dir.path() / "missing.jsonl"), Error);
}

TEST(Ply, AsciiRoundTrip) {
  TempDir dir("ply");
  const auto obj = make_object(ObjectKind::CupWithHandle, 0.12);
  io::write_ply(dir.path() / "cup.ply", obj.model);
  const auto back = io::read_ply(dir.path() / "cup.ply");
  EXPECT_EQ(back.vertices, obj.model.vertices);
  EXPECT_EQ(back.triangles, obj.model.triangles);
}

TEST(Ply, BinaryQuadsAndUnitScale) {
  TempDir dir("plybin");
  const auto path = dir.path() / "quad.ply";
  {
    std::ofstream out(path, std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\ncomment unit square in mm\n"
        << "element vertex 4\nproperty float x\nproperty float y\nproperty float z\n"
        << "property uchar red\n"
        << "element face 1\nproperty list uchar int vertex_indices\nend_header\n";
    const float xyz[4][3] = {{0, 0, 0}, {10, 0, 0}, {10, 10, 0}, {0, 10, 0}};
    for (const auto& v : xyz) {
      out.write(reinterpret_cast<const char*>(v), sizeof(v));
      out.put(static_cast<char>(200));
    }
    out.put(4);
    const std::int32_t idx[4] = {0, 1, 2, 3};
    out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
  }
  const auto m = io::read_ply(path, 0.001);
  ASSERT_EQ(m.vertices.size(), 4u);
  EXPECT_NEAR(m.vertices[2].x(), 0.01, 1e-12);
  ASSERT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.triangles[0], Eigen::Vector3i(0, 1, 2));
  EXPECT_EQ(m.triangles[1], Eigen::Vector3i(0, 2, 3));
}

TEST(Ply, MalformedHeaderRejected) {
  TempDir dir("plybad");
  std::ofstream(dir.path() / "bad.ply") << "not a ply\n";
  EXPECT_THROW(io::read_ply(dir.path() / "bad.ply"), Error);
}

TEST(Models, InfoRoundTrip) {
  TempDir dir("models");
  std::map<std::string, ObjectModel> models;
  models["box"] = make_object(ObjectKind::Box, 0.1).model;
  models["can"] = make_object(ObjectKind::Cylinder, 0.1).model;
  io::write_models(dir.path(), models);
  const auto back = io::read_models(dir.path());
  ASSERT_EQ(back.size(), 2u);
  for (const auto& [id, m] : models) {
    const auto& b = back.at(id);
    EXPECT_EQ(b.vertices.size(), m.vertices.size());
    EXPECT_DOUBLE_EQ(b.diameter, m.diameter);
    EXPECT_EQ(b.is_symmetric, m.is_symmetric);
    ASSERT_EQ(b.discrete_symmetries.size(), m.discrete_symmetries.size());
    for (std::size_t i = 0; i < m.discrete_symmetries.size(); ++i) {
      EXPECT_TRUE(b.discrete_symmetries[i].rotation.isApprox(m.discrete_symmetries[i].rotation, 1e-15));
    }
    ASSERT_EQ(b.continuous_symmetries.size(), m.continuous_symmetries.size());
    for (std::size_t i = 0; i < m.continuous_symmetries.size(); ++i) {
      EXPECT_EQ(b.continuous_symmetries[i].axis, m.continuous_symmetries[i].axis);
      EXPECT_EQ(b.continuous_symmetries[i].offset, m.continuous_symmetries[i].offset);
    }
  }
}
