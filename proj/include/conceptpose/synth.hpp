/**
 * @file synth.hpp
 * @brief Parametric test objects with per-part concept fields, and
 *        anchor/query frame pairs rendered under a known relative pose.
 */
#pragma once

#include <conceptpose/geometry.hpp>
#include <conceptpose/object_model.hpp>
#include <conceptpose/renderer.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace conceptpose {

enum class ObjectKind { CupWithHandle, Box, Cylinder, AsymmetricBlob };

std::string_view to_string(ObjectKind kind);
std::optional<ObjectKind> parse_object_kind(std::string_view name);

struct SyntheticObject {
  ObjectKind kind = ObjectKind::CupWithHandle;
  ObjectModel model;
  ConceptField field;
  std::vector<std::string> part_names;
  std::vector<int> vertex_part;  ///< index into part_names
};

/// `size` is the object's height (cup, cylinder), longest edge (box) or
/// nominal diameter (blob), in meters.
SyntheticObject make_object(ObjectKind kind, double size);

struct NoiseConfig {
  double depth_sigma = 0.0;     ///< meters, Gaussian on object pixels
  double saliency_sigma = 0.0;  ///< additive Gaussian, clamped to [0,1]
  double outlier_frac = 0.0;    ///< object pixels given uniform depth in [0.3, 1.0] m
};

struct SyntheticPair {
  SyntheticView anchor;
  SyntheticView query;
  RigidTransform relative;  ///< ground-truth anchor -> query camera motion
  RigidTransform anchor_pose;
  RigidTransform query_pose;
};

/// 640x480 with f = 350 px and the principal point at the image center.
CameraIntrinsics default_intrinsics();

/// Object 0.5 m in front of the camera, seen from 30 degrees above with the
/// handle side turned toward the viewer.
RigidTransform canonical_anchor_pose();

/// Renders the anchor at the canonical pose and the query at
/// compose(relative, canonical). Throws ErrorKind::DegenerateFrame when
/// either view is empty.
SyntheticPair make_pair(const SyntheticObject& object, const RigidTransform& relative,
                        const CameraIntrinsics& k, const NoiseConfig& noise, std::uint64_t seed);

/// Camera-frame motion that rotates the object about its own center by up
/// to `max_angle_deg` (random axis) and shifts it by up to `max_shift` m.
RigidTransform random_relative_pose(std::uint64_t seed, double max_angle_deg, double max_shift);

}  // namespace conceptpose
