#pragma once

#include <conceptpose/image.hpp>

#include <cstdint>
#include <filesystem>

namespace conceptpose::io {

/// Decoded PNG samples, 8 or 16 bits, 1 to 4 channels, interleaved.
struct PngData {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

/// Palette and sub-byte images are expanded to 8 bits. Throws ErrorKind::Ingestion.
PngData read_png(const std::filesystem::path& path);

Image<Rgb> read_png_rgb(const std::filesystem::path& path);
Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path);

void write_png_rgb(const std::filesystem::path& path, const Image<Rgb>& image);
void write_png_gray8(const std::filesystem::path& path, const Image<std::uint8_t>& image);
void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image);

}  // namespace conceptpose::io
