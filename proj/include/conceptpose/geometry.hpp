/**
 * @file geometry.hpp
 * @brief Pinhole camera model, depth backprojection and rigid transforms.
 *
 * Conventions:
 * - depth is in meters, 0 marks an invalid pixel
 * - pixel coordinates are (u = column, v = row) with the origin at the
 *   top-left pixel center
 * - a RigidTransform maps P to R*P + t; compose(A, B) applies B first
 */
#pragma once

#include <conceptpose/image.hpp>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

namespace conceptpose {

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ErrorKind::Configuration if any invariant is broken.
  void validate() const;

  Eigen::Matrix3d matrix() const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }
  static RigidTransform from_rotation(const Eigen::Matrix3d& r) {
    return {r, Eigen::Vector3d::Zero()};
  }

  /// Orthonormality and det=+1 within tol.
  bool is_valid(double tol = 1e-6) const;
  /// Throws ErrorKind::ContractViolation when !is_valid().
  void validate() const;

  Eigen::Vector3d operator()(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
};

struct Pixel {
  int u = 0;
  int v = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct BackprojectedPoint {
  Pixel pixel;
  Eigen::Vector3d point;
};

/// One RGB-D observation of the target object.
struct Frame {
  Image<Rgb> rgb;
  Image<double> depth;
  Image<std::uint8_t> mask;
  CameraIntrinsics intrinsics;

  int width() const noexcept { return intrinsics.width; }
  int height() const noexcept { return intrinsics.height; }

  void validate() const;
  std::size_t mask_area() const;
};

Eigen::Matrix3d rot_x(double degrees);
Eigen::Matrix3d rot_y(double degrees);
Eigen::Matrix3d rot_z(double degrees);
Eigen::Matrix3d rot_axis(const Eigen::Vector3d& axis, double degrees);

/// Emits one point per pixel with mask=1 and depth>0, in row-major order.
std::vector<BackprojectedPoint> backproject(const Frame& frame);

Eigen::Vector3d backproject_pixel(const CameraIntrinsics& k, double u, double v, double depth);
Eigen::Vector2d project(const CameraIntrinsics& k, const Eigen::Vector3d& p);

Eigen::Vector3d apply_transform(const RigidTransform& t, const Eigen::Vector3d& p);

/// (a ∘ b)(p) = a(b(p)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

/// Projects a near-rotation matrix onto SO(3).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r);

/// Geodesic distance between the two rotations, in [0, 180].
double rotation_angle_deg(const RigidTransform& a, const RigidTransform& b);
double rotation_angle_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);
double translation_error(const RigidTransform& a, const RigidTransform& b);

}  // namespace conceptpose
