#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "checks.hpp"
#include "illum/stimulus.hpp"

namespace illum {

using detail::check_canvas;
using detail::check_level;
using detail::level;
using detail::require;

namespace {

struct HermannLayout {
  int count = 0;     // squares per side
  int origin_x = 0;  // top-left of the first square
  int origin_y = 0;
  int pitch = 0;     // square + street
};

HermannLayout hermann_layout(const HermannSpec& s) {
  check_canvas(s.canvas);
  check_level(s.square_intensity, "square_intensity");
  check_level(s.street_intensity, "street_intensity");
  require(s.square_intensity != s.street_intensity, ErrorKind::parameter,
          "square and street intensities must differ");
  require(s.square_size >= 1 && s.street_width >= 1, ErrorKind::parameter,
          "square_size and street_width must be >= 1");
  require(s.street_width < s.square_size, ErrorKind::geometry,
          "street_width must be smaller than square_size");
  require(std::isfinite(s.blob_radius) && s.blob_radius > 0.0, ErrorKind::parameter,
          "blob_radius must be > 0");
  require(s.squares_per_side >= 0, ErrorKind::parameter, "squares_per_side must be >= 0");

  const int side = std::min(s.canvas.width, s.canvas.height);
  HermannLayout g;
  g.pitch = s.square_size + s.street_width;
  g.count = s.squares_per_side > 0 ? s.squares_per_side : (side + s.street_width) / g.pitch;
  const int extent = g.count * s.square_size + (g.count - 1) * s.street_width;
  require(extent <= side, ErrorKind::dimension, "Hermann grid does not fit the canvas");
  require(g.count >= 2, ErrorKind::geometry,
          "Hermann grid needs at least 2x2 squares to have an interior intersection");
  g.origin_x = (s.canvas.width - extent) / 2;
  g.origin_y = (s.canvas.height - extent) / 2;
  return g;
}

bool in_square(const HermannSpec& s, const HermannLayout& g, int x, int y) {
  const int dx = x - g.origin_x;
  const int dy = y - g.origin_y;
  if (dx < 0 || dy < 0) return false;
  if (dx / g.pitch >= g.count || dy / g.pitch >= g.count) return false;
  return dx % g.pitch < s.square_size && dy % g.pitch < s.square_size;
}

}  // namespace

void detail::check_grid(const GridSpec& s) {
  check_canvas(s.canvas);
  check_level(s.patch_intensity, "patch_intensity");
  check_level(s.bg_intensity, "bg_intensity");
  check_level(s.line_intensity, "line_intensity");
  require(s.patch_intensity != s.bg_intensity && s.patch_intensity != s.line_intensity,
          ErrorKind::parameter, "patch_intensity must differ from background and lines");
  require(s.line_width >= 1 && s.cell_size >= 2, ErrorKind::parameter,
          "line_width must be >= 1 and cell_size >= 2");
  require(s.line_width < s.cell_size, ErrorKind::geometry,
          "line_width must be smaller than cell_size");
  require(s.cell_size <= s.canvas.height / 2 && s.cell_size <= s.canvas.width,
          ErrorKind::dimension, "grid cell does not fit the half-canvas");
}

void detail::check_hermann(const HermannSpec& s) { (void)hermann_layout(s); }

namespace layout {

std::vector<Point> hermann_intersections(const HermannSpec& s) {
  const auto g = hermann_layout(s);
  const double centre_offset = (s.street_width - 1) / 2.0;
  std::vector<Point> points;
  for (int j = 0; j + 1 < g.count; ++j) {
    for (int i = 0; i + 1 < g.count; ++i) {
      points.push_back({g.origin_x + (i + 1) * s.square_size + i * s.street_width + centre_offset,
                        g.origin_y + (j + 1) * s.square_size + j * s.street_width + centre_offset});
    }
  }
  return points;
}

}  // namespace layout

Rendering render_hermann(const HermannSpec& s) {
  const auto g = hermann_layout(s);
  const int w = s.canvas.width;
  const int h = s.canvas.height;
  Rendering out{Image(w, h, level(s.street_intensity)), Mask(w, h), Mask(w, h)};
  for (int j = 0; j < g.count; ++j)
    for (int i = 0; i < g.count; ++i)
      fill_rect(out.image,
                {g.origin_x + i * g.pitch, g.origin_y + j * g.pitch, s.square_size, s.square_size},
                level(s.square_intensity));

  const double r2 = s.blob_radius * s.blob_radius;
  const int reach = static_cast<int>(std::ceil(s.blob_radius));
  for (const auto& p : layout::hermann_intersections(s)) {
    const int cx = static_cast<int>(std::floor(p.x));
    const int cy = static_cast<int>(std::floor(p.y));
    for (int y = std::max(0, cy - reach); y <= std::min(h - 1, cy + reach + 1); ++y) {
      for (int x = std::max(0, cx - reach); x <= std::min(w - 1, cx + reach + 1); ++x) {
        const double dx = x - p.x;
        const double dy = y - p.y;
        if (dx * dx + dy * dy <= r2 && !in_square(s, g, x, y)) out.mask.at(x, y) = 1;
      }
    }
  }
  return out;
}

Rendering render_grid(const GridSpec& s) {
  detail::check_grid(s);
  const int w = s.canvas.width;
  const int h = s.canvas.height;
  const int half = h / 2;

  // Built as the upper variant; the lower one is its vertical mirror.
  Rendering out{Image(w, h, level(s.bg_intensity)), Mask(w, h), Mask(w, h)};
  for (int y = 0; y < half; ++y)
    for (int x = 0; x < w; ++x)
      if (y % s.cell_size < s.line_width || x % s.cell_size < s.line_width)
        out.image.at(x, y) = level(s.line_intensity);

  const int rows = half / s.cell_size;
  int patch_row = 0;
  const auto centre_dist = [&](int r) {
    return std::abs(2 * r * s.cell_size + s.cell_size + s.line_width - half);
  };
  for (int r = 1; r < rows; ++r)
    if (centre_dist(r) < centre_dist(patch_row)) patch_row = r;

  const int interior = s.cell_size - s.line_width;
  const int top = patch_row * s.cell_size + s.line_width;
  for (int c = 0; (c + 1) * s.cell_size <= w; ++c) {
    const Rect patch{c * s.cell_size + s.line_width, top, interior, interior};
    const Rect twin{patch.x, h - (patch.y + patch.height), interior, interior};
    fill_rect(out.image, patch, level(s.patch_intensity));
    fill_rect(out.image, twin, level(s.patch_intensity));
    fill_rect(out.mask, patch, std::uint8_t{1});
    fill_rect(out.reference, twin, std::uint8_t{1});
  }

  if (s.variant == GridVariant::lower) {
    out.image = flip_vertical(out.image);
    out.mask = flip_vertical(out.mask);
    out.reference = flip_vertical(out.reference);
  }
  return out;
}

}  // namespace illum
