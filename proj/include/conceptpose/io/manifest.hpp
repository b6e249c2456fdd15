/**
 * @file manifest.hpp
 * @brief Line-delimited JSON pair manifests.
 *
 * One object per line:
 *   {"pair_id": "...", "anchor": {"scene_id": "...", "frame_id": "..."},
 *    "query": {...}, "object_id": "...", "category": "...",
 *    "anchor_pose": [r00 .. r22, tx, ty, tz], "query_pose": [...]}
 * Poses are optional, row-major rotation then translation in meters.
 * Frames resolve to <root>/<scene_id>/ in the frame directory layout.
 */
#pragma once

#include <conceptpose/geometry.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace conceptpose::io {

struct FrameRef {
  std::string scene_id;
  std::string frame_id;
};

struct PairManifestEntry {
  std::string pair_id;
  FrameRef anchor;
  FrameRef query;
  std::string object_id;
  std::string category;
  std::optional<RigidTransform> anchor_pose;
  std::optional<RigidTransform> query_pose;

  /// Throws ErrorKind::Ingestion.
  void validate() const;
};

std::vector<double> pose_to_numbers(const RigidTransform& t);
/// Throws ErrorKind::Ingestion on wrong length or an invalid rotation.
RigidTransform pose_from_numbers(const std::vector<double>& v);

/// Blank lines are skipped; errors name the line number.
std::vector<PairManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<PairManifestEntry>& entries);

}  // namespace conceptpose::io
