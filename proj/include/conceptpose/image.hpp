#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace conceptpose {

/// Row-major raster indexed as (u = column, v = row), origin top-left.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int u, int v) {
    assert(u >= 0 && u < width_ && v >= 0 && v < height_);
    return data_[static_cast<std::size_t>(v) * width_ + u];
  }
  const T& operator()(int u, int v) const {
    assert(u >= 0 && u < width_ && v >= 0 && v < height_);
    return data_[static_cast<std::size_t>(v) * width_ + u];
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

}  // namespace conceptpose
