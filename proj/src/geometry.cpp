#include <conceptpose/geometry.hpp>

#include <conceptpose/error.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace conceptpose {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double max_orthonormality_drift(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace

void CameraIntrinsics::validate() const {
  std::ostringstream why;
  if (!(fx > 0.0) || !(fy > 0.0)) why << "focal lengths must be positive; ";
  if (width <= 0 || height <= 0) why << "image size must be positive; ";
  if (!(cx >= 0.0 && cx < width)) why << "cx outside [0, width); ";
  if (!(cy >= 0.0 && cy < height)) why << "cy outside [0, height); ";
  if (!why.str().empty()) {
    throw Error(ErrorKind::Configuration, "invalid intrinsics: " + why.str());
  }
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  return max_orthonormality_drift(rotation) <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol;
}

void RigidTransform::validate() const {
  if (!is_valid()) {
    throw Error(ErrorKind::ContractViolation, "rotation is not a proper orthonormal matrix");
  }
}

void Frame::validate() const {
  intrinsics.validate();
  const int w = intrinsics.width;
  const int h = intrinsics.height;
  if (!rgb.same_shape(w, h) || !depth.same_shape(w, h) || !mask.same_shape(w, h)) {
    throw Error(ErrorKind::Configuration, "frame rasters do not share the intrinsics' size");
  }
  for (double d : depth.data()) {
    if (!std::isfinite(d) || d < 0.0) {
      throw Error(ErrorKind::Configuration, "depth must be finite and non-negative");
    }
  }
  for (auto m : mask.data()) {
    if (m > 1) throw Error(ErrorKind::Configuration, "mask values must be 0 or 1");
  }
}

std::size_t Frame::mask_area() const {
  std::size_t n = 0;
  for (auto m : mask.data()) n += (m != 0);
  return n;
}

Eigen::Matrix3d rot_x(double degrees) {
  return Eigen::AngleAxisd(degrees / kDegPerRad, Eigen::Vector3d::UnitX()).toRotationMatrix();
}

Eigen::Matrix3d rot_y(double degrees) {
  return Eigen::AngleAxisd(degrees / kDegPerRad, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

Eigen::Matrix3d rot_z(double degrees) {
  return Eigen::AngleAxisd(degrees / kDegPerRad, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

Eigen::Matrix3d rot_axis(const Eigen::Vector3d& axis, double degrees) {
  return Eigen::AngleAxisd(degrees / kDegPerRad, axis.normalized()).toRotationMatrix();
}

Eigen::Vector3d backproject_pixel(const CameraIntrinsics& k, double u, double v, double depth) {
  return {(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};
}

Eigen::Vector2d project(const CameraIntrinsics& k, const Eigen::Vector3d& p) {
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

std::vector<BackprojectedPoint> backproject(const Frame& frame) {
  std::vector<BackprojectedPoint> out;
  const auto& k = frame.intrinsics;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const double d = frame.depth(u, v);
      if (frame.mask(u, v) == 0 || !(d > 0.0)) continue;
      out.push_back({{u, v}, backproject_pixel(k, u, v, d)});
    }
  }
  return out;
}

Eigen::Vector3d apply_transform(const RigidTransform& t, const Eigen::Vector3d& p) {
  return t.rotation * p + t.translation;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  if (max_orthonormality_drift(out.rotation) > 1e-9) {
    out.rotation = orthonormalize(out.rotation);
  }
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  const Eigen::Matrix3d rt = t.rotation.transpose();
  return {rt, -(rt * t.translation)};
}

double rotation_angle_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  // atan2 keeps full precision near 0 and 180 degrees where acos of the
  // trace term does not.
  const Eigen::Matrix3d r = a.transpose() * b;
  const double cos_term = 0.5 * (r.trace() - 1.0);
  const Eigen::Vector3d skew{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
  const double sin_term = 0.5 * skew.norm();
  return std::atan2(sin_term, cos_term) * kDegPerRad;
}

double rotation_angle_deg(const RigidTransform& a, const RigidTransform& b) {
  return rotation_angle_deg(a.rotation, b.rotation);
}

double translation_error(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation - b.translation).norm();
}

}  // namespace conceptpose
