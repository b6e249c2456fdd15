#include <conceptpose/error.hpp>
#include <conceptpose/io/csal.hpp>
#include <conceptpose/io/frame_io.hpp>
#include <conceptpose/io/png_io.hpp>
#include <conceptpose/synth.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <filesystem>
#include <fstream>

using namespace conceptpose;
using conceptpose::testkit::TempDir;
namespace fs = std::filesystem;

namespace {

void write_raw_frame(const fs::path& dir, const std::string& id, int w, int h,
                     std::uint16_t depth_mm, std::uint8_t mask_value) {
  for (const char* sub : {"rgb", "depth", "mask", "intrinsics"}) fs::create_directories(dir / sub);
  io::write_png_rgb(dir / "rgb" / (id + ".png"), Image<Rgb>(w, h, Rgb{10, 20, 30}));
  io::write_png_gray16(dir / "depth" / (id + ".png"), Image<std::uint16_t>(w, h, depth_mm));
  io::write_png_gray8(dir / "mask" / (id + ".png"), Image<std::uint8_t>(w, h, mask_value));
  io::write_intrinsics(dir / "intrinsics" / (id + ".txt"), {100, 100, w / 2.0, h / 2.0, w, h});
}

template <typename F>
void expect_ingestion_error_naming(F&& f, const std::string& needle) {
  try {
    f();
    FAIL() << "expected an ingestion error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Ingestion);
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Png, RoundTrips) {
  TempDir dir("png");
  Image<Rgb> rgb(5, 3);
  Image<std::uint16_t> g16(5, 3);
  Image<std::uint8_t> g8(5, 3);
  for (int v = 0; v < 3; ++v) {
    for (int u = 0; u < 5; ++u) {
      rgb(u, v) = {static_cast<std::uint8_t>(u * 40), static_cast<std::uint8_t>(v * 90), 7};
      g16(u, v) = static_cast<std::uint16_t>(u * 13000 + v);
      g8(u, v) = static_cast<std::uint8_t>(u + v * 5);
    }
  }
  io::write_png_rgb(dir.path() / "c.png", rgb);
  io::write_png_gray16(dir.path() / "d.png", g16);
  io::write_png_gray8(dir.path() / "m.png", g8);
  EXPECT_TRUE(io::read_png_rgb(dir.path() / "c.png") == rgb);
  EXPECT_TRUE(io::read_png_gray16(dir.path() / "d.png") == g16);
  const auto m = io::read_png(dir.path() / "m.png");
  EXPECT_EQ(m.bit_depth, 8);
  EXPECT_EQ(m.channels, 1);
  EXPECT_EQ(m.samples[7], g8.data()[7]);
}

TEST(Png, MissingFileIsIngestionError) {
  expect_ingestion_error_naming([] { io::read_png("/nonexistent/x.png"); }, "x.png");
}

TEST(Intrinsics, RoundTripAndErrors) {
  TempDir dir("intr");
  const CameraIntrinsics k{350.25, 351.5, 319.75, 240.125, 640, 480};
  io::write_intrinsics(dir.path() / "k.txt", k);
  EXPECT_EQ(io::read_intrinsics(dir.path() / "k.txt"), k);
  std::ofstream(dir.path() / "bad.txt") << "fx=1\nfy=1\ncx=0\n";
  expect_ingestion_error_naming([&] { io::read_intrinsics(dir.path() / "bad.txt"); }, "bad.txt");
}

TEST(LoadFrame, UnitsAndMask) {
  TempDir dir("frame");
  write_raw_frame(dir.path(), "f0", 8, 6, 1500, 255);
  const Frame f = io::load_frame(dir.path(), "f0");
  EXPECT_EQ(f.width(), 8);
  EXPECT_EQ(f.height(), 6);
  EXPECT_DOUBLE_EQ(f.depth(3, 2), 1.5);
  EXPECT_EQ(f.mask(3, 2), 1);
  EXPECT_EQ(f.rgb(0, 0), (Rgb{10, 20, 30}));
}

TEST(LoadFrame, SizeMismatchNamesFile) {
  TempDir dir("mismatch");
  write_raw_frame(dir.path(), "f0", 8, 6, 1000, 1);
  io::write_png_gray16(dir.path() / "depth" / "f0.png", Image<std::uint16_t>(7, 6, 1000));
  expect_ingestion_error_naming([&] { io::load_frame(dir.path(), "f0"); }, "depth");
}

TEST(LoadFrame, MissingRasterNamesFile) {
  TempDir dir("missing");
  write_raw_frame(dir.path(), "f0", 8, 6, 1000, 1);
  fs::remove(dir.path() / "mask" / "f0.png");
  expect_ingestion_error_naming([&] { io::load_frame(dir.path(), "f0"); }, "mask");
}

TEST(SaveView, RoundTripQuantizesDepthToMillimeters) {
  TempDir dir("view");
  const auto obj = make_object(ObjectKind::CupWithHandle, 0.12);
  const auto k = default_intrinsics();
  const auto view = render_synthetic_frame(obj.model, canonical_anchor_pose(), k, obj.field);
  io::save_view(dir.path(), "a", view);
  const auto back = io::load_view(dir.path(), "a");
  EXPECT_EQ(back.frame.intrinsics, k);
  EXPECT_TRUE(back.frame.mask == view.frame.mask);
  EXPECT_TRUE(back.frame.rgb == view.frame.rgb);
  EXPECT_TRUE(back.saliency == view.saliency);
  for (std::size_t i = 0; i < view.frame.depth.size(); ++i) {
    EXPECT_NEAR(back.frame.depth.data()[i], view.frame.depth.data()[i], 0.0005 + 1e-12);
  }
}

TEST(SaveFrame, RejectsUnrepresentableDepth) {
  TempDir dir("far");
  Frame f;
  f.intrinsics = {10, 10, 1, 1, 2, 2};
  f.rgb = Image<Rgb>(2, 2);
  f.depth = Image<double>(2, 2, 70.0);
  f.mask = Image<std::uint8_t>(2, 2, 1);
  EXPECT_THROW(io::save_frame(dir.path(), "x", f), Error);
}

TEST(LoadView, SaliencySizeMustMatch) {
  TempDir dir("salsize");
  write_raw_frame(dir.path(), "f0", 8, 6, 1000, 1);
  fs::create_directories(dir.path() / "saliency");
  io::write_saliency(dir.path() / "saliency" / "f0.csal", SaliencyTensor({"a"}, "c", 5, 8));
  expect_ingestion_error_naming([&] { io::load_view(dir.path(), "f0"); }, "f0.csal");
}
