#include "illum/image.hpp"

#include <algorithm>
#include <cmath>

#include "illum/error.hpp"
#include "illum/rng.hpp"

namespace illum {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::compatibility: return "compatibility";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::io: return "io";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::unfittable: return "unfittable";
  }
  return "unknown";
}

std::size_t count_set(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](auto v) { return v != 0; }));
}

bool is_all_zero(const Mask& mask) { return count_set(mask) == 0; }

Image crop_resize_nearest(const Image& image, const Rect& rect, int width, int height) {
  const int x0 = std::clamp(rect.x, 0, image.width() - 1);
  const int y0 = std::clamp(rect.y, 0, image.height() - 1);
  const int cw = std::clamp(rect.width, 1, image.width() - x0);
  const int ch = std::clamp(rect.height, 1, image.height() - y0);
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    // Integer source mapping keeps the result exact and platform independent.
    const int sy = y0 + static_cast<int>((static_cast<long long>(y) * ch) / height);
    for (int x = 0; x < width; ++x) {
      const int sx = x0 + static_cast<int>((static_cast<long long>(x) * cw) / width);
      out.at(x, y) = image.at(sx, sy);
    }
  }
  return out;
}

ResponseMap to_response(const Mask& mask) {
  ResponseMap out(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0 : 0.0;
  return out;
}

ResponseMap to_response(const Image& image) {
  ResponseMap out(image.width(), image.height());
  auto src = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0;
  return out;
}

Image mask_to_image(const Mask& mask) {
  Image out(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
  return out;
}

Mask image_to_mask(const Image& image) {
  Mask out(image.width(), image.height());
  auto src = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1 : 0;
  return out;
}

std::uint64_t content_hash(const Image& image) {
  std::uint64_t h = hash_combine(static_cast<std::uint64_t>(image.width()),
                                 static_cast<std::uint64_t>(image.height()));
  for (auto v : image.pixels()) {
    h ^= v;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace illum
