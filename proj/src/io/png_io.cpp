#include <conceptpose/io/png_io.hpp>

#include <conceptpose/error.hpp>

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

namespace conceptpose::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorKind::Ingestion, path.string() + ": " + what);
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               int bit_depth, const std::vector<std::uint8_t>& rows_bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(path, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "PNG encoding failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = rows_bytes.size() / static_cast<std::size_t>(height);
  for (int v = 0; v < height; ++v) {
    png_write_row(png, rows_bytes.data() + static_cast<std::size_t>(v) * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

PngData read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "missing or unreadable");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(path, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "libpng initialization failed");
  }
  PngData out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_expand(png);
  if (png_get_bit_depth(png, info) == 16) png_set_swap(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(rowbytes * static_cast<std::size_t>(out.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(out.height));
  for (int v = 0; v < out.height; ++v) rows[v] = buffer.data() + rowbytes * v;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

Image<Rgb> read_png_rgb(const std::filesystem::path& path) {
  const PngData png = read_png(path);
  if (png.bit_depth != 8 || png.channels < 3) fail(path, "expected 8-bit RGB");
  Image<Rgb> img(png.width, png.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const std::size_t s = i * png.channels;
    img.data()[i] = {static_cast<unsigned char>(png.samples[s]),
                     static_cast<unsigned char>(png.samples[s + 1]),
                     static_cast<unsigned char>(png.samples[s + 2])};
  }
  return img;
}

Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  const PngData png = read_png(path);
  if (png.bit_depth != 16 || png.channels != 1) fail(path, "expected 16-bit single-channel");
  Image<std::uint16_t> img(png.width, png.height);
  img.data() = png.samples;
  return img;
}

void write_png_rgb(const std::filesystem::path& path, const Image<Rgb>& image) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.size() * 3);
  for (const auto& p : image.data()) bytes.insert(bytes.end(), {p.r, p.g, p.b});
  write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, bytes);
}

void write_png_gray8(const std::filesystem::path& path, const Image<std::uint8_t>& image) {
  write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 8, image.data());
}

void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.size() * 2);
  for (auto s : image.data()) {
    bytes.push_back(static_cast<std::uint8_t>(s >> 8));  // PNG stores 16-bit big-endian
    bytes.push_back(static_cast<std::uint8_t>(s & 0xff));
  }
  write_png(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 16, bytes);
}

}  // namespace conceptpose::io
