#include <conceptpose/io/frame_io.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/io/csal.hpp>
#include <conceptpose/io/png_io.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace conceptpose::io {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
  throw Error(ErrorKind::Ingestion, path.string() + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CameraIntrinsics read_intrinsics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "missing or unreadable");
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(path, "line " + std::to_string(line_no) + " is not key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto number = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(path, std::string("missing key ") + key);
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      fail(path, std::string("bad value for ") + key);
    }
  };
  CameraIntrinsics k;
  k.fx = number("fx");
  k.fy = number("fy");
  k.cx = number("cx");
  k.cy = number("cy");
  const double w = number("width");
  const double h = number("height");
  if (w != std::floor(w) || h != std::floor(h)) fail(path, "width/height must be integers");
  k.width = static_cast<int>(w);
  k.height = static_cast<int>(h);
  try {
    k.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return k;
}

void write_intrinsics(const fs::path& path, const CameraIntrinsics& k) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path, "cannot write");
  out.precision(17);
  out << "fx=" << k.fx << "\nfy=" << k.fy << "\ncx=" << k.cx << "\ncy=" << k.cy
      << "\nwidth=" << k.width << "\nheight=" << k.height << "\n";
}

Frame load_frame(const fs::path& dir, const std::string& frame_id) {
  const fs::path rgb_path = dir / "rgb" / (frame_id + ".png");
  const fs::path depth_path = dir / "depth" / (frame_id + ".png");
  const fs::path mask_path = dir / "mask" / (frame_id + ".png");
  fs::path k_path = dir / "intrinsics" / (frame_id + ".txt");
  if (!fs::exists(k_path)) k_path = dir / "intrinsics.txt";

  Frame f;
  f.rgb = read_png_rgb(rgb_path);
  const auto depth_mm = read_png_gray16(depth_path);
  if (!depth_mm.same_shape(f.rgb.width(), f.rgb.height())) {
    fail(depth_path, "size differs from " + rgb_path.filename().string());
  }
  const PngData mask = read_png(mask_path);
  if (mask.width != f.rgb.width() || mask.height != f.rgb.height()) {
    fail(mask_path, "size differs from " + rgb_path.filename().string());
  }
  f.intrinsics = read_intrinsics(k_path);
  if (f.intrinsics.width != f.rgb.width() || f.intrinsics.height != f.rgb.height()) {
    fail(k_path, "image size differs from " + rgb_path.filename().string());
  }

  f.depth = Image<double>(depth_mm.width(), depth_mm.height());
  for (std::size_t i = 0; i < depth_mm.size(); ++i) {
    f.depth.data()[i] = depth_mm.data()[i] / 1000.0;
  }
  f.mask = Image<std::uint8_t>(mask.width, mask.height);
  for (std::size_t i = 0; i < f.mask.size(); ++i) {
    bool any = false;
    for (int c = 0; c < mask.channels; ++c) any = any || mask.samples[i * mask.channels + c] != 0;
    f.mask.data()[i] = any ? 1 : 0;
  }
  return f;
}

SyntheticView load_view(const fs::path& dir, const std::string& frame_id) {
  SyntheticView view;
  view.frame = load_frame(dir, frame_id);
  const fs::path s_path = dir / "saliency" / (frame_id + ".csal");
  try {
    view.saliency = read_saliency(s_path);
  } catch (const Error& e) {
    throw Error(ErrorKind::Ingestion, e.what());
  }
  if (view.saliency.width != view.frame.rgb.width() ||
      view.saliency.height != view.frame.rgb.height()) {
    fail(s_path, "saliency size differs from the frame");
  }
  try {
    view.saliency.validate();
  } catch (const Error& e) {
    fail(s_path, e.what());
  }
  return view;
}

void save_frame(const fs::path& dir, const std::string& frame_id, const Frame& frame) {
  frame.validate();
  for (const char* sub : {"rgb", "depth", "mask", "intrinsics"}) fs::create_directories(dir / sub);
  write_png_rgb(dir / "rgb" / (frame_id + ".png"), frame.rgb);
  Image<std::uint16_t> mm(frame.depth.width(), frame.depth.height());
  for (std::size_t i = 0; i < mm.size(); ++i) {
    const double v = std::round(frame.depth.data()[i] * 1000.0);
    if (v > 65535.0) {
      throw Error(ErrorKind::Configuration, "depth above 65.535 m cannot be stored");
    }
    mm.data()[i] = static_cast<std::uint16_t>(v);
  }
  write_png_gray16(dir / "depth" / (frame_id + ".png"), mm);
  Image<std::uint8_t> mask(frame.mask.width(), frame.mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) mask.data()[i] = frame.mask.data()[i] ? 255 : 0;
  write_png_gray8(dir / "mask" / (frame_id + ".png"), mask);
  write_intrinsics(dir / "intrinsics" / (frame_id + ".txt"), frame.intrinsics);
}

void save_view(const fs::path& dir, const std::string& frame_id, const SyntheticView& view) {
  save_frame(dir, frame_id, view.frame);
  fs::create_directories(dir / "saliency");
  write_saliency(dir / "saliency" / (frame_id + ".csal"), view.saliency);
}

}  // namespace conceptpose::io
