#include <conceptpose/synth.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/kdtree.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

namespace conceptpose {

namespace {

constexpr double kPi = std::numbers::pi;

class MeshBuilder {
 public:
  int add_part(std::string name) {
    names_.push_back(std::move(name));
    return static_cast<int>(names_.size()) - 1;
  }

  int vertex(const Eigen::Vector3d& p, int part) {
    vertices_.push_back(p);
    parts_.push_back(part);
    return static_cast<int>(vertices_.size()) - 1;
  }

  void triangle(int a, int b, int c) { triangles_.emplace_back(a, b, c); }

  /// Tessellates f over [0,1]^2 with nu x nv quads. `wrap_u` closes the
  /// surface along u.
  void surface(const std::function<Eigen::Vector3d(double, double)>& f, int nu, int nv, int part,
               bool wrap_u) {
    const int cols = wrap_u ? nu : nu + 1;
    const int base = static_cast<int>(vertices_.size());
    for (int j = 0; j <= nv; ++j) {
      for (int i = 0; i < cols; ++i) {
        vertex(f(static_cast<double>(i) / nu, static_cast<double>(j) / nv), part);
      }
    }
    auto at = [&](int i, int j) { return base + j * cols + (i % cols); };
    for (int j = 0; j < nv; ++j) {
      for (int i = 0; i < nu; ++i) {
        triangle(at(i, j), at(i + 1, j), at(i + 1, j + 1));
        triangle(at(i, j), at(i + 1, j + 1), at(i, j + 1));
      }
    }
  }

  /// Disk of radius r at height z, normal along z.
  void disk(double r, double z, int segments, int rings, int part) {
    surface(
        [&](double u, double v) {
          const double a = 2.0 * kPi * u;
          return Eigen::Vector3d(v * r * std::cos(a), v * r * std::sin(a), z);
        },
        segments, rings, part, true);
  }

  void relabel(int vertex_index, int part) { parts_[vertex_index] = part; }

  const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
  std::vector<Eigen::Vector3i>& triangles() { return triangles_; }
  const std::vector<int>& parts() const { return parts_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<Eigen::Vector3i> triangles_;
  std::vector<int> parts_;
  std::vector<std::string> names_;
};

void build_cylinder(MeshBuilder& mesh, double radius, double height, int side, int top,
                    int bottom) {
  mesh.surface(
      [&](double u, double v) {
        const double a = 2.0 * kPi * u;
        return Eigen::Vector3d(radius * std::cos(a), radius * std::sin(a), (v - 0.5) * height);
      },
      72, 24, side, true);
  mesh.disk(radius, 0.5 * height, 72, 6, top);
  mesh.disk(radius, -0.5 * height, 72, 6, bottom);
}

void build_box(MeshBuilder& mesh, const Eigen::Vector3d& dims) {
  const Eigen::Vector3d h = 0.5 * dims;
  struct Face {
    const char* name;
    int axis;
    double sign;
  };
  const Face faces[] = {{"right", 0, 1.0}, {"left", 0, -1.0}, {"back", 1, 1.0},
                        {"front", 1, -1.0}, {"top", 2, 1.0},  {"bottom", 2, -1.0}};
  for (const auto& face : faces) {
    const int part = mesh.add_part(face.name);
    const int a1 = (face.axis + 1) % 3;
    const int a2 = (face.axis + 2) % 3;
    mesh.surface(
        [&](double u, double v) {
          Eigen::Vector3d p;
          p[face.axis] = face.sign * h[face.axis];
          p[a1] = (2.0 * u - 1.0) * h[a1];
          p[a2] = (2.0 * v - 1.0) * h[a2];
          return p;
        },
        16, 16, part, false);
  }
}

void build_blob(MeshBuilder& mesh, double size) {
  // Icosphere, three subdivisions, with a smooth asymmetric radial bump.
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                                    {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                                    {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Eigen::Vector3i> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int level = 0; level < 3; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.emplace_back(tri[0], ab, ca);
      next.emplace_back(tri[1], bc, ab);
      next.emplace_back(tri[2], ca, bc);
      next.emplace_back(ab, bc, ca);
    }
    f = std::move(next);
  }

  const std::vector<std::pair<const char*, Eigen::Vector3d>> lobes = {
      {"crest", Eigen::Vector3d(0.2, 0.3, 1.0)},    {"keel", Eigen::Vector3d(-0.1, 0.2, -1.0)},
      {"bulge", Eigen::Vector3d(1.0, -0.3, 0.1)},   {"dimple", Eigen::Vector3d(-1.0, -0.4, 0.3)},
      {"ridge", Eigen::Vector3d(0.3, 1.0, -0.2)},   {"flank", Eigen::Vector3d(-0.2, -1.0, -0.4)}};
  std::vector<int> part_ids;
  for (const auto& [name, dir] : lobes) part_ids.push_back(mesh.add_part(name));

  const int base = static_cast<int>(mesh.vertices().size());
  for (const auto& dir : v) {
    const double bump = 1.0 + 0.22 * std::sin(3.0 * dir.x() + 1.0) * std::cos(2.0 * dir.y()) +
                        0.12 * std::sin(5.0 * dir.z() + 0.5) + 0.18 * std::max(0.0, dir.x() * dir.z());
    int best = 0;
    double best_dot = -2.0;
    for (std::size_t i = 0; i < lobes.size(); ++i) {
      const double d = dir.dot(lobes[i].second.normalized());
      if (d > best_dot) {
        best_dot = d;
        best = static_cast<int>(i);
      }
    }
    mesh.vertex(0.5 * size * bump * dir, part_ids[best]);
  }
  for (const auto& tri : f) mesh.triangle(base + tri[0], base + tri[1], base + tri[2]);
}

void build_cup(MeshBuilder& mesh, double height) {
  const double radius = 0.4 * height;
  const int body = mesh.add_part("body");
  const int rim = mesh.add_part("rim");
  const int base = mesh.add_part("base");
  const int handle = mesh.add_part("handle");
  const int logo = mesh.add_part("logo");
  const int body_first = static_cast<int>(mesh.vertices().size());
  build_cylinder(mesh, radius, height, body, rim, base);
  const int body_last = body_first + 72 * 25;

  // Printed logo: a patch of the body facing -y, a quarter turn from the handle.
  for (int i = body_first; i < body_last; ++i) {
    const Eigen::Vector3d& p = mesh.vertices()[i];
    const double azimuth = std::atan2(p.y(), p.x());
    if (std::abs(azimuth + 0.5 * kPi) < 35.0 * kPi / 180.0 && std::abs(p.z()) < 0.25 * height) {
      mesh.relabel(i, logo);
    }
  }

  // Handle: a torus arc in the xz-plane whose ends sink into the body.
  const double major = 0.25 * height;
  const double minor = 0.05 * height;
  const double arc = 100.0 * kPi / 180.0;
  mesh.surface(
      [&](double u, double v) {
        const double a = -arc + 2.0 * arc * u;
        const double b = 2.0 * kPi * v;
        const double ring = major + minor * std::cos(b);
        return Eigen::Vector3d(radius + ring * std::cos(a), minor * std::sin(b),
                               ring * std::sin(a));
      },
      48, 12, handle, false);
}

/// Channel j decays with distance to the nearest vertex of part j.
ConceptField falloff_field(const std::vector<Eigen::Vector3d>& vertices,
                           const std::vector<int>& vertex_part,
                           const std::vector<std::string>& names, double sigma,
                           std::string category) {
  ConceptField field;
  field.labels = names;
  field.category = std::move(category);
  field.values.resize(static_cast<Eigen::Index>(vertices.size()),
                      static_cast<Eigen::Index>(names.size()));
  for (std::size_t part = 0; part < names.size(); ++part) {
    std::vector<Eigen::Vector3d> members;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (vertex_part[i] == static_cast<int>(part)) members.push_back(vertices[i]);
    }
    const KdTree tree(members);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const double d2 = members.empty() ? 1e9 : tree.nearest(vertices[i]).sq_dist;
      field.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(part)) =
          std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
  return field;
}

}  // namespace

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::CupWithHandle: return "cup_with_handle";
    case ObjectKind::Box: return "box";
    case ObjectKind::Cylinder: return "cylinder";
    case ObjectKind::AsymmetricBlob: return "asymmetric_blob";
  }
  return "unknown";
}

std::optional<ObjectKind> parse_object_kind(std::string_view name) {
  for (auto k : {ObjectKind::CupWithHandle, ObjectKind::Box, ObjectKind::Cylinder,
                 ObjectKind::AsymmetricBlob}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

SyntheticObject make_object(ObjectKind kind, double size) {
  if (!(size > 0.0) || !std::isfinite(size)) {
    throw Error(ErrorKind::Configuration, "object size must be positive");
  }
  MeshBuilder mesh;
  SyntheticObject obj;
  obj.kind = kind;
  std::string category;
  switch (kind) {
    case ObjectKind::CupWithHandle:
      build_cup(mesh, size);
      category = "mug";
      obj.model.is_symmetric = false;
      break;
    case ObjectKind::Box: {
      const Eigen::Vector3d dims(size, 0.75 * size, 0.5 * size);
      build_box(mesh, dims);
      category = "box";
      obj.model.is_symmetric = true;
      obj.model.discrete_symmetries = {RigidTransform::from_rotation(rot_x(180.0)),
                                       RigidTransform::from_rotation(rot_y(180.0)),
                                       RigidTransform::from_rotation(rot_z(180.0))};
      break;
    }
    case ObjectKind::Cylinder: {
      const int side = mesh.add_part("side");
      const int top = mesh.add_part("top");
      const int bottom = mesh.add_part("bottom");
      build_cylinder(mesh, 0.35 * size, size, side, top, bottom);
      category = "can";
      obj.model.is_symmetric = true;
      obj.model.continuous_symmetries = {{Eigen::Vector3d::UnitZ(), Eigen::Vector3d::Zero()}};
      break;
    }
    case ObjectKind::AsymmetricBlob:
      build_blob(mesh, size);
      category = "blob";
      obj.model.is_symmetric = false;
      break;
  }

  obj.model.vertices = mesh.vertices();
  obj.model.triangles = mesh.triangles();
  obj.model.diameter = compute_diameter(obj.model.vertices);
  obj.part_names = mesh.names();
  obj.vertex_part = mesh.parts();
  obj.field = falloff_field(obj.model.vertices, obj.vertex_part, obj.part_names, 0.25 * size,
                            category);
  return obj;
}

CameraIntrinsics default_intrinsics() { return {350.0, 350.0, 320.0, 240.0, 640, 480}; }

RigidTransform canonical_anchor_pose() {
  return {rot_x(120.0) * rot_z(-45.0), Eigen::Vector3d(0.0, 0.0, 0.5)};
}

namespace {

void corrupt(SyntheticView& view, const NoiseConfig& noise, std::mt19937_64& rng) {
  std::vector<std::size_t> object_pixels;
  auto& depth = view.frame.depth.data();
  const auto& mask = view.frame.mask.data();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) object_pixels.push_back(i);
  }
  if (noise.depth_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise.depth_sigma);
    for (auto i : object_pixels) depth[i] = std::max(1e-3, depth[i] + gauss(rng));
  }
  if (noise.outlier_frac > 0.0) {
    const auto count = static_cast<std::size_t>(
        std::llround(std::clamp(noise.outlier_frac, 0.0, 1.0) * object_pixels.size()));
    std::uniform_real_distribution<double> far(0.3, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, object_pixels.size() - 1);
      std::swap(object_pixels[i], object_pixels[pick(rng)]);
      depth[object_pixels[i]] = far(rng);
    }
  }
  if (noise.saliency_sigma > 0.0) {
    std::normal_distribution<float> gauss(0.0f, static_cast<float>(noise.saliency_sigma));
    const std::size_t plane = mask.size();
    for (int c = 0; c < view.saliency.channels(); ++c) {
      for (std::size_t i = 0; i < plane; ++i) {
        float& s = view.saliency.data[c * plane + i];
        s = std::clamp(s + gauss(rng), 0.0f, 1.0f);
      }
    }
  }
}

}  // namespace

SyntheticPair make_pair(const SyntheticObject& object, const RigidTransform& relative,
                        const CameraIntrinsics& k, const NoiseConfig& noise, std::uint64_t seed) {
  SyntheticPair pair;
  pair.relative = relative;
  pair.anchor_pose = canonical_anchor_pose();
  pair.query_pose = compose(relative, pair.anchor_pose);
  pair.anchor = render_synthetic_frame(object.model, pair.anchor_pose, k, object.field);
  try {
    pair.query = render_synthetic_frame(object.model, pair.query_pose, k, object.field);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("query viewpoint: ") + e.what());
  }
  std::mt19937_64 rng(seed);
  corrupt(pair.anchor, noise, rng);
  corrupt(pair.query, noise, rng);
  return pair;
}

RigidTransform random_relative_pose(std::uint64_t seed, double max_angle_deg, double max_shift) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  if (axis.norm() < 1e-9) axis = Eigen::Vector3d::UnitY();
  const double angle = max_angle_deg * unit(rng);
  Eigen::Vector3d shift(gauss(rng), gauss(rng), gauss(rng));
  shift = shift.normalized() * max_shift * unit(rng);
  const Eigen::Vector3d center = canonical_anchor_pose().translation;
  const Eigen::Matrix3d r = rot_axis(axis, angle);
  return {r, center - r * center + shift};
}

}  // namespace conceptpose
