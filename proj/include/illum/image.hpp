#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace illum {

// Row-major 2-D raster. `Image` holds 8-bit gray levels, `Mask` holds {0,1}
// bits, `ResponseMap` holds soft scores in [0,1].
template <typename T, typename Tag>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::span<T> row(int y) { return std::span<T>(data_).subspan(index(0, y), width_); }
  std::span<const T> row(int y) const {
    return std::span<const T>(data_).subspan(index(0, y), width_);
  }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Image = Raster<std::uint8_t, struct ImageTag>;
using Mask = Raster<std::uint8_t, struct MaskTag>;
using ResponseMap = Raster<double, struct ResponseTag>;

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(int px, int py) const noexcept {
    return px >= x && px < x + width && py >= y && py < y + height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Clips `rect` to the raster.
template <typename T, typename Tag>
void fill_rect(Raster<T, Tag>& raster, const Rect& rect, T value) {
  const int x0 = rect.x < 0 ? 0 : rect.x;
  const int y0 = rect.y < 0 ? 0 : rect.y;
  const int x1 = rect.x + rect.width > raster.width() ? raster.width() : rect.x + rect.width;
  const int y1 = rect.y + rect.height > raster.height() ? raster.height() : rect.y + rect.height;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) raster.at(x, y) = value;
}

std::size_t count_set(const Mask& mask);
bool is_all_zero(const Mask& mask);

template <typename R>
R flip_horizontal(const R& in) {
  R out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) out.at(in.width() - 1 - x, y) = in.at(x, y);
  return out;
}

template <typename R>
R flip_vertical(const R& in) {
  R out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) out.at(x, in.height() - 1 - y) = in.at(x, y);
  return out;
}

// Crops `rect` (clipped to the image) and resizes back to width x height with
// nearest-neighbour sampling, so the output stays on the input's level set.
Image crop_resize_nearest(const Image& image, const Rect& rect, int width, int height);

ResponseMap to_response(const Mask& mask);
ResponseMap to_response(const Image& image);  // level / 255

// Expands {0,1} to {0,255} for storage.
Image mask_to_image(const Mask& mask);
// Any nonzero pixel becomes 1.
Mask image_to_mask(const Image& image);

std::uint64_t content_hash(const Image& image);

}  // namespace illum
