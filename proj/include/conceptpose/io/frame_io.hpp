/**
 * @file frame_io.hpp
 * @brief Frame directories.
 *
 *   <dir>/rgb/<id>.png         8-bit RGB
 *   <dir>/depth/<id>.png       16-bit gray, millimeters, 0 = invalid
 *   <dir>/mask/<id>.png        any nonzero sample = object
 *   <dir>/intrinsics/<id>.txt  key=value: fx fy cx cy width height
 *                              (falls back to <dir>/intrinsics.txt)
 *   <dir>/saliency/<id>.csal
 */
#pragma once

#include <conceptpose/geometry.hpp>
#include <conceptpose/renderer.hpp>

#include <filesystem>
#include <string>

namespace conceptpose::io {

CameraIntrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& k);

/// Throws ErrorKind::Ingestion naming the offending file.
Frame load_frame(const std::filesystem::path& dir, const std::string& frame_id);

/// Frame plus its saliency tensor, checked for matching size.
SyntheticView load_view(const std::filesystem::path& dir, const std::string& frame_id);

/// Depth is rounded to whole millimeters; depths above 65.535 m throw.
void save_frame(const std::filesystem::path& dir, const std::string& frame_id,
                const Frame& frame);
void save_view(const std::filesystem::path& dir, const std::string& frame_id,
               const SyntheticView& view);

}  // namespace conceptpose::io
