/**
 * @file csal.hpp
 * @brief CSAL binary saliency-tensor files.
 *
 * Layout, all integers little-endian:
 *   "CSAL" | u32 version (1) | u32 L | u32 H | u32 W |
 *   u16 len + category bytes | L x (u16 len + label bytes) |
 *   L*H*W float32 values, channel-major then row-major.
 */
#pragma once

#include <conceptpose/concept_cloud.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace conceptpose::io {

inline constexpr std::uint32_t kCsalVersion = 1;

/// Header bytes before the label block: magic, version and three dims.
inline constexpr std::size_t kCsalFixedHeader = 20;

std::vector<std::uint8_t> encode_csal(const SaliencyTensor& tensor);

/// Throws ErrorKind::Format with the byte offset of the first problem.
SaliencyTensor decode_csal(std::span<const std::uint8_t> bytes);

void write_saliency(const std::filesystem::path& path, const SaliencyTensor& tensor);
SaliencyTensor read_saliency(const std::filesystem::path& path);

}  // namespace conceptpose::io
