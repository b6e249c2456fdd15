/**
 * @file model_io.hpp
 * @brief Evaluation models: PLY meshes plus a models_info.json index.
 *
 * models_info.json maps object ids to
 *   {"file": "obj.ply", "diameter": m (optional, computed if absent),
 *    "unit_scale": 1.0 (multiplies PLY coordinates into meters),
 *    "symmetries_discrete": [[12 numbers], ...],
 *    "symmetries_continuous": [{"axis": [3], "offset": [3]}, ...]}
 */
#pragma once

#include <conceptpose/object_model.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace conceptpose::io {

/// ASCII or binary little-endian PLY with vertex x/y/z and optional faces.
ObjectModel read_ply(const std::filesystem::path& path, double unit_scale = 1.0);
void write_ply(const std::filesystem::path& path, const ObjectModel& model);

std::map<std::string, ObjectModel> read_models(const std::filesystem::path& models_dir);
/// Writes <id>.ply files and models_info.json.
void write_models(const std::filesystem::path& models_dir,
                  const std::map<std::string, ObjectModel>& models);

}  // namespace conceptpose::io
