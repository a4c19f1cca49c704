#include <algorithm>
#include <cmath>
#include <numbers>

#include "checks.hpp"
#include "illum/stimulus.hpp"

namespace illum {

using detail::require;

namespace {

Canvas canvas_of(const BaseSpec& base) {
  return std::visit(
      [](const auto& s) -> Canvas {
        if constexpr (requires { s.canvas; }) return s.canvas;
        else return s.base.canvas;
      },
      base);
}

void check_transform(const BaseSpec& base, const DotInsertion& t) {
  require(std::holds_alternative<HermannSpec>(base), ErrorKind::compatibility,
          "dot_insertion applies to Hermann grids only, not " +
              std::string(to_string(family_of(base))));
  const Canvas c = canvas_of(base);
  require(std::isfinite(t.radius) && t.radius > 0.0 &&
              t.radius <= std::min(c.width, c.height) / 4.0,
          ErrorKind::parameter, "dot radius must lie in (0, canvas/4]");
  require(t.count >= 0, ErrorKind::parameter, "dot count must be >= 0");
}

void check_transform(const BaseSpec&, const OrientationChange& t) {
  require(std::isfinite(t.angle_deg), ErrorKind::parameter, "rotation angle must be finite");
  if (t.fill) detail::check_level(*t.fill, "fill");
}

void check_transform(const BaseSpec& base, const NonlinearWarp& t) {
  const Canvas c = canvas_of(base);
  require(std::isfinite(t.amplitude) && t.amplitude >= 0.0 &&
              t.amplitude <= std::min(c.width, c.height) / 4.0,
          ErrorKind::parameter, "warp amplitude must lie in [0, canvas/4]");
  detail::check_finite_positive(t.wavelength, "warp wavelength");
}

Image insert_dots(const HermannSpec& hermann, const Image& src, const DotInsertion& t) {
  Image out = src;
  const auto dot_level = static_cast<std::uint8_t>(255 - hermann.street_intensity);
  auto points = layout::hermann_intersections(hermann);
  if (t.count > 0 && static_cast<std::size_t>(t.count) < points.size())
    points.resize(static_cast<std::size_t>(t.count));
  const double r2 = t.radius * t.radius;
  for (const auto& p : points) {
    for (int y = 0; y < out.height(); ++y) {
      const double dy = y - p.y;
      if (dy * dy > r2) continue;
      for (int x = 0; x < out.width(); ++x) {
        const double dx = x - p.x;
        if (dx * dx + dy * dy <= r2) out.at(x, y) = dot_level;
      }
    }
  }
  return out;
}

Image rotate(const Image& src, const OrientationChange& t) {
  double angle = std::fmod(t.angle_deg, 360.0);
  if (angle < 0) angle += 360.0;
  if (angle == 0.0) return src;

  const auto fill = static_cast<std::uint8_t>(t.fill.value_or(src.at(0, 0)));
  const double rad = angle * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double cx = (src.width() - 1) / 2.0;
  const double cy = (src.height() - 1) / 2.0;

  // Inverse mapping with nearest-neighbour lookup keeps the level set intact.
  Image out(src.width(), src.height(), fill);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      const long sx = std::lround(c * dx + s * dy + cx);
      const long sy = std::lround(-s * dx + c * dy + cy);
      if (sx >= 0 && sy >= 0 && sx < src.width() && sy < src.height())
        out.at(x, y) = src.at(static_cast<int>(sx), static_cast<int>(sy));
    }
  }
  return out;
}

Image warp(const Image& src, const NonlinearWarp& t) {
  const double k = 2.0 * std::numbers::pi / t.wavelength;
  Image out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const long sx = std::lround(x + t.amplitude * std::sin(k * y));
      const long sy = std::lround(y + t.amplitude * std::sin(k * x));
      out.at(x, y) = src.at(static_cast<int>(std::clamp<long>(sx, 0, src.width() - 1)),
                            static_cast<int>(std::clamp<long>(sy, 0, src.height() - 1)));
    }
  }
  return out;
}

}  // namespace

void detail::check_base(const BaseSpec& base) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SbcSpec>) detail::check_sbc(s);
        else if constexpr (std::is_same_v<T, WhiteSpec>) detail::check_white(s);
        else if constexpr (std::is_same_v<T, HermannSpec>) detail::check_hermann(s);
        else if constexpr (std::is_same_v<T, GridSpec>) detail::check_grid(s);
        else if constexpr (std::is_same_v<T, GratingSpec>) detail::check_grating(s);
        else if constexpr (std::is_same_v<T, HoweSpec>) detail::check_howe(s);
        else if constexpr (std::is_same_v<T, ShiftedWhiteSpec>) detail::check_shifted_white(s);
        else if constexpr (std::is_same_v<T, MachBandSpec>) detail::check_mach_band(s);
        else detail::check_cornsweet(s);
      },
      base);
}

void detail::check_non_illusion(const NonIllusionSpec& spec) {
  check_base(spec.base);
  std::visit([&](const auto& t) { check_transform(spec.base, t); }, spec.transform);
}

Rendering render_non_illusion(const NonIllusionSpec& spec) {
  detail::check_non_illusion(spec);
  const Rendering base = render(spec.base);
  const int w = base.image.width();
  const int h = base.image.height();

  Image image = std::visit(
      [&](const auto& t) -> Image {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, DotInsertion>) return insert_dots(std::get<HermannSpec>(spec.base), base.image, t);
        else if constexpr (std::is_same_v<T, OrientationChange>) return rotate(base.image, t);
        else return warp(base.image, t);
      },
      spec.transform);
  return {std::move(image), Mask(w, h), Mask(w, h)};
}

}  // namespace illum
