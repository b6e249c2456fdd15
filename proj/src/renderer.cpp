#include <conceptpose/renderer.hpp>

#include <conceptpose/error.hpp>

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>

namespace conceptpose {

namespace {

constexpr int kTileRows = 16;

struct ScreenTriangle {
  int id = 0;
  bool flipped = false;
  std::array<Eigen::Vector2d, 3> p;
  std::array<double, 3> inv_z{};
  int u_min = 0, u_max = -1, v_min = 0, v_max = -1;
};

bool lex_less(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.y() < b.y() || (a.y() == b.y() && a.x() < b.x());
}

/// Edge function of a->b at p, evaluated in a canonical endpoint order so the
/// value for b->a is the exact negation.
double edge(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double px, double py) {
  if (lex_less(b, a)) return -edge(b, a, px, py);
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

/// Which of the two directed copies of a shared edge owns pixels lying on it.
bool owns_boundary(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double dx = b.x() - a.x();
  const double dy = b.y() - a.y();
  return dy > 0.0 || (dy == 0.0 && dx < 0.0);
}

bool inside(double e, bool owner) { return e > 0.0 || (e == 0.0 && owner); }

std::vector<ScreenTriangle> project_triangles(const ObjectModel& model, const RigidTransform& pose,
                                              const CameraIntrinsics& k) {
  std::vector<Eigen::Vector3d> cam(model.vertices.size());
  for (std::size_t i = 0; i < cam.size(); ++i) cam[i] = pose(model.vertices[i]);

  std::vector<ScreenTriangle> out;
  out.reserve(model.triangles.size());
  for (std::size_t t = 0; t < model.triangles.size(); ++t) {
    ScreenTriangle s;
    s.id = static_cast<int>(t);
    bool behind = false;
    for (int c = 0; c < 3; ++c) {
      const int vi = model.triangles[t][c];
      const Eigen::Vector3d& x = cam[vi];
      if (!(x.z() > kNearPlane)) behind = true;
      s.p[c] = project(k, x);
      s.inv_z[c] = 1.0 / x.z();
    }
    if (behind) continue;
    const double area = edge(s.p[0], s.p[1], s.p[2].x(), s.p[2].y());
    if (area == 0.0 || !std::isfinite(area)) continue;
    if (area < 0.0) {
      s.flipped = true;
      std::swap(s.p[1], s.p[2]);
      std::swap(s.inv_z[1], s.inv_z[2]);
    }
    const double x_lo = std::min({s.p[0].x(), s.p[1].x(), s.p[2].x()});
    const double x_hi = std::max({s.p[0].x(), s.p[1].x(), s.p[2].x()});
    const double y_lo = std::min({s.p[0].y(), s.p[1].y(), s.p[2].y()});
    const double y_hi = std::max({s.p[0].y(), s.p[1].y(), s.p[2].y()});
    if (x_hi < 0.0 || y_hi < 0.0 || x_lo > k.width - 1 || y_lo > k.height - 1) continue;
    s.u_min = std::max(0, static_cast<int>(std::ceil(x_lo)));
    s.u_max = std::min(k.width - 1, static_cast<int>(std::floor(x_hi)));
    s.v_min = std::max(0, static_cast<int>(std::ceil(y_lo)));
    s.v_max = std::min(k.height - 1, static_cast<int>(std::floor(y_hi)));
    if (s.u_min > s.u_max || s.v_min > s.v_max) continue;
    out.push_back(s);
  }
  return out;
}

void raster_band(const std::vector<ScreenTriangle>& tris, int v_begin, int v_end,
                 RasterFragments& f) {
  auto& depth = f.render.depth;
  for (const auto& s : tris) {
    const int lo = std::max(v_begin, s.v_min);
    const int hi = std::min(v_end - 1, s.v_max);
    if (lo > hi) continue;
    const bool own12 = owns_boundary(s.p[1], s.p[2]);
    const bool own20 = owns_boundary(s.p[2], s.p[0]);
    const bool own01 = owns_boundary(s.p[0], s.p[1]);
    for (int v = lo; v <= hi; ++v) {
      for (int u = s.u_min; u <= s.u_max; ++u) {
        const double e0 = edge(s.p[1], s.p[2], u, v);
        const double e1 = edge(s.p[2], s.p[0], u, v);
        const double e2 = edge(s.p[0], s.p[1], u, v);
        if (!inside(e0, own12) || !inside(e1, own20) || !inside(e2, own01)) continue;
        // 1/z is affine in screen space; with equal vertex depths the ratio
        // is exact, so fronto-parallel planes render their exact depth.
        const double inv_z =
            (e0 * s.inv_z[0] + e1 * s.inv_z[1] + e2 * s.inv_z[2]) / (e0 + e1 + e2);
        const double z = 1.0 / inv_z;
        int& owner = f.triangle(u, v);
        double& zbuf = depth(u, v);
        if (owner >= 0 && !(z < zbuf || (z == zbuf && s.id < owner))) continue;
        zbuf = z;
        owner = s.id;
        const Eigen::Vector3d w(e0 * s.inv_z[0], e1 * s.inv_z[1], e2 * s.inv_z[2]);
        Eigen::Vector3d bary = w / w.sum();
        // Stored against the model's corner order.
        if (s.flipped) std::swap(bary[1], bary[2]);
        f.barycentric(u, v) = bary;
      }
    }
  }
}

}  // namespace

RasterFragments rasterize(const ObjectModel& model, const RigidTransform& pose,
                          const CameraIntrinsics& k, Execution exec) {
  k.validate();
  RasterFragments f;
  f.render.depth = Image<double>(k.width, k.height, 0.0);
  f.render.mask = Image<std::uint8_t>(k.width, k.height, 0);
  f.triangle = Image<int>(k.width, k.height, -1);
  f.barycentric = Image<Eigen::Vector3d>(k.width, k.height, Eigen::Vector3d::Zero());

  const auto tris = project_triangles(model, pose, k);
  const int bands = (k.height + kTileRows - 1) / kTileRows;
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < bands; ++b) {
      raster_band(tris, b * kTileRows, std::min(k.height, (b + 1) * kTileRows), f);
    }
  } else {
    for (int b = 0; b < bands; ++b) {
      raster_band(tris, b * kTileRows, std::min(k.height, (b + 1) * kTileRows), f);
    }
  }
  for (std::size_t i = 0; i < f.render.depth.size(); ++i) {
    f.render.mask.data()[i] = f.triangle.data()[i] >= 0 ? 1 : 0;
  }
  return f;
}

DepthRender render_depth(const ObjectModel& model, const RigidTransform& pose,
                         const CameraIntrinsics& k, Execution exec) {
  return rasterize(model, pose, k, exec).render;
}

SyntheticView render_synthetic_frame(const ObjectModel& model, const RigidTransform& pose,
                                     const CameraIntrinsics& k, const ConceptField& field,
                                     Execution exec) {
  const auto channels = static_cast<int>(field.labels.size());
  if (channels < 1 || field.values.rows() != static_cast<Eigen::Index>(model.vertices.size()) ||
      field.values.cols() != channels) {
    throw Error(ErrorKind::Configuration, "concept field does not match the model");
  }
  const RasterFragments f = rasterize(model, pose, k, exec);

  SyntheticView view;
  view.frame.intrinsics = k;
  view.frame.depth = f.render.depth;
  view.frame.mask = f.render.mask;
  view.frame.rgb = Image<Rgb>(k.width, k.height);
  view.saliency = SaliencyTensor(field.labels, field.category, k.height, k.width);
  if (view.frame.mask_area() == 0) {
    throw Error(ErrorKind::DegenerateFrame, "synthetic view renders no object pixel");
  }

  const Eigen::Matrix3d& r = pose.rotation;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const int tri = f.triangle(u, v);
      if (tri < 0) continue;
      const Eigen::Vector3i& corners = model.triangles[tri];
      // Flat Lambert shade against the viewing ray as a visual placeholder.
      const Eigen::Vector3d a = r * model.vertices[corners[0]];
      const Eigen::Vector3d b = r * model.vertices[corners[1]];
      const Eigen::Vector3d c = r * model.vertices[corners[2]];
      const Eigen::Vector3d normal = (b - a).cross(c - a).normalized();
      const Eigen::Vector3d ray = backproject_pixel(k, u, v, 1.0).normalized();
      const auto shade = static_cast<unsigned char>(40.0 + 200.0 * std::abs(normal.dot(ray)));
      view.frame.rgb(u, v) = {shade, shade, shade};

      const Eigen::Vector3d& bary = f.barycentric(u, v);
      for (int ch = 0; ch < channels; ++ch) {
        const double value = bary[0] * field.values(corners[0], ch) +
                             bary[1] * field.values(corners[1], ch) +
                             bary[2] * field.values(corners[2], ch);
        view.saliency.at(ch, u, v) = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  return view;
}

}  // namespace conceptpose
