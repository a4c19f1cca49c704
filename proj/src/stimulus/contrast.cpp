// Contrast/assimilation displays built from two fields and gray test patches:
// SBC, White, Howe transition and shifted White.
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

// Horizontal placement shared by SBC and White so that their patches coincide.
int centred_x(int width, int patch_width, Side side) {
  const int half = width / 2;
  return side == Side::left ? (half - patch_width) / 2 : half + (width - half - patch_width) / 2;
}

std::vector<Rect> white_patch_rects(const WhiteSpec& s, Side side) {
  const int dark_rows = s.stripe_period / 2;
  const int bright_rows = s.stripe_period - dark_rows;
  const int offset = side == Side::left ? 0 : dark_rows;
  const int band_height = side == Side::left ? dark_rows : bright_rows;

  std::vector<int> tops;
  for (int top = offset; top + band_height <= s.canvas.height; top += s.stripe_period)
    tops.push_back(top);
  require(static_cast<int>(tops.size()) >= s.patch_count_per_side, ErrorKind::dimension,
          "canvas holds too few stripes for " + std::to_string(s.patch_count_per_side) +
              " patches per side");

  // Twice the distance keeps the comparison in integers.
  const auto dist = [&](int top) { return std::abs(2 * top + band_height - s.canvas.height); };
  std::stable_sort(tops.begin(), tops.end(),
                   [&](int a, int b) { return dist(a) < dist(b); });
  tops.resize(static_cast<std::size_t>(s.patch_count_per_side));
  std::sort(tops.begin(), tops.end());

  const int x = centred_x(s.canvas.width, s.patch_length, side);
  std::vector<Rect> rects;
  for (int top : tops) rects.push_back({x, top, s.patch_length, band_height});
  return rects;
}

}  // namespace

void detail::check_sbc(const SbcSpec& s) {
  check_canvas(s.canvas);
  check_level(s.patch_intensity, "patch_intensity");
  check_level(s.dark_bg, "dark_bg");
  check_level(s.bright_bg, "bright_bg");
  require(s.dark_bg < s.patch_intensity && s.patch_intensity < s.bright_bg,
          ErrorKind::precondition, "SBC requires dark_bg < patch_intensity < bright_bg");
  detail::check_finite_positive(s.patch_aspect, "patch_aspect");
  require(s.patch_width >= 1, ErrorKind::parameter, "patch_width must be >= 1");
  const int ph = layout::sbc_patch_height(s);
  require(ph >= 1, ErrorKind::parameter, "patch height rounds to zero");
  require(s.patch_width <= s.canvas.width / 2 && ph <= s.canvas.height, ErrorKind::dimension,
          "SBC patch " + std::to_string(s.patch_width) + "x" + std::to_string(ph) +
              " exceeds the half-canvas");
  for (const auto& top : {s.left_patch_top, s.right_patch_top}) {
    require(!top || (*top >= 0 && *top + ph <= s.canvas.height), ErrorKind::dimension,
            "SBC patch top outside the canvas");
  }
}

void detail::check_white(const WhiteSpec& s) {
  check_canvas(s.canvas);
  check_level(s.stripe_dark, "stripe_dark");
  check_level(s.stripe_bright, "stripe_bright");
  check_level(s.patch_intensity, "patch_intensity");
  require(s.stripe_dark < s.patch_intensity && s.patch_intensity < s.stripe_bright,
          ErrorKind::precondition, "White requires stripe_dark < patch_intensity < stripe_bright");
  require(s.stripe_period >= 2, ErrorKind::parameter, "stripe_period must be >= 2");
  require(s.patch_length >= 1, ErrorKind::parameter, "patch_length must be >= 1");
  require(s.patch_length <= s.canvas.width / 2, ErrorKind::dimension,
          "patch_length " + std::to_string(s.patch_length) + " exceeds the half-canvas width");
  require(s.patch_count_per_side >= 1, ErrorKind::parameter, "patch_count_per_side must be >= 1");
  white_patch_rects(s, Side::left);
  white_patch_rects(s, Side::right);
}

void detail::check_howe(const HoweSpec& s) {
  check_white(s.base);
  const int w = s.base.canvas.width;
  const int h = s.base.canvas.height;
  require(s.crossing_line_width >= 0, ErrorKind::parameter, "crossing_line_width must be >= 0");
  require(s.crossing_line_width <= std::max(w, h), ErrorKind::dimension,
          "crossing_line_width " + std::to_string(s.crossing_line_width) + " exceeds the canvas");
  require(layout::howe_transition_width(s) >= 0, ErrorKind::parameter,
          "transition_width must be >= 0");
}

namespace {

struct ShiftedLayout {
  int block = 0;
  int rows = 0;
  int left_col = 0;
  int right_col = 0;
  int band = 0;
};

ShiftedLayout shifted_layout(const ShiftedWhiteSpec& s) {
  const WhiteSpec& b = s.base;
  check_canvas(b.canvas);
  check_level(b.stripe_dark, "stripe_dark");
  check_level(b.stripe_bright, "stripe_bright");
  check_level(b.patch_intensity, "patch_intensity");
  require(b.stripe_dark < b.patch_intensity && b.patch_intensity < b.stripe_bright,
          ErrorKind::precondition, "shifted White requires stripe_dark < patch < stripe_bright");
  require(b.stripe_period >= 2 && b.stripe_period % 2 == 0, ErrorKind::parameter,
          "shifted White needs an even stripe_period >= 2");
  require(b.patch_length >= 1, ErrorKind::parameter, "patch_length must be >= 1");
  require(std::isfinite(s.patch_aspect) && s.patch_aspect > 0.0, ErrorKind::parameter,
          "patch_aspect must be > 0");
  detail::check_finite_positive(s.checkerboard_threshold, "checkerboard_threshold");
  require(b.canvas.height >= b.stripe_period, ErrorKind::dimension,
          "canvas shorter than one stripe period");

  const int w = b.canvas.width;
  const int h = b.canvas.height;
  ShiftedLayout g;
  g.rows = b.stripe_period / 2;
  g.block = layout::shifted_white_block_width(s);
  const int columns = (w + g.block - 1) / g.block;
  const int bands = h / g.rows;

  g.left_col = (w / 4) / g.block;
  g.right_col = (3 * w / 4) / g.block;
  if ((g.right_col - g.left_col) % 2 == 0) g.right_col += (g.right_col + 1 < columns) ? 1 : -1;
  require(g.right_col > g.left_col, ErrorKind::dimension,
          "block layout leaves no room for patches");

  // Band nearest the vertical centre on which the left column is dark.
  g.band = -1;
  for (int j = 0; j < bands; ++j) {
    if ((g.left_col + j) % 2 != 0) continue;
    if (g.band < 0 ||
        std::abs(2 * j * g.rows + g.rows - h) < std::abs(2 * g.band * g.rows + g.rows - h))
      g.band = j;
  }
  require(g.band >= 0, ErrorKind::dimension, "no stripe band available for the patches");
  return g;
}

}  // namespace

void detail::check_shifted_white(const ShiftedWhiteSpec& s) { (void)shifted_layout(s); }

namespace {

std::uint8_t stripe_level(const WhiteSpec& s, int y) {
  const int dark_rows = s.stripe_period / 2;
  return level((y % s.stripe_period) < dark_rows ? s.stripe_dark : s.stripe_bright);
}

Mask rect_mask(const Canvas& canvas, const std::vector<Rect>& rects) {
  Mask m(canvas.width, canvas.height);
  for (const auto& r : rects) fill_rect(m, r, std::uint8_t{1});
  return m;
}

}  // namespace

namespace layout {

int sbc_patch_height(const SbcSpec& spec) {
  return static_cast<int>(std::lround(spec.patch_aspect * spec.patch_width));
}

std::vector<Rect> white_patches(const WhiteSpec& s, Side side) {
  detail::check_white(s);
  return white_patch_rects(s, side);
}

int howe_transition_width(const HoweSpec& spec) {
  return spec.transition_width < 0 ? spec.base.stripe_period / 2 : spec.transition_width;
}

int shifted_white_block_width(const ShiftedWhiteSpec& spec) {
  const int stripe_rows = spec.base.stripe_period / 2;
  const long block = std::lround(spec.patch_aspect * stripe_rows);
  return static_cast<int>(std::clamp<long>(block, 1, spec.base.canvas.width / 2));
}

}  // namespace layout

Rendering render_sbc(const SbcSpec& s) {
  detail::check_sbc(s);
  const int w = s.canvas.width;
  const int h = s.canvas.height;
  const int half = w / 2;
  const int ph = layout::sbc_patch_height(s);

  const int left_bg = s.bright_side == Side::right ? s.dark_bg : s.bright_bg;
  const int right_bg = s.bright_side == Side::right ? s.bright_bg : s.dark_bg;

  Rendering out{Image(w, h), Mask(w, h), Mask(w, h)};
  fill_rect(out.image, {0, 0, half, h}, level(left_bg));
  fill_rect(out.image, {half, 0, w - half, h}, level(right_bg));

  const int centred_top = (h - ph) / 2;
  const Rect left{centred_x(w, s.patch_width, Side::left), s.left_patch_top.value_or(centred_top),
                  s.patch_width, ph};
  const Rect right{centred_x(w, s.patch_width, Side::right),
                   s.right_patch_top.value_or(centred_top), s.patch_width, ph};
  fill_rect(out.image, left, level(s.patch_intensity));
  fill_rect(out.image, right, level(s.patch_intensity));

  const bool right_is_target = s.bright_side == Side::right;
  fill_rect(out.mask, right_is_target ? right : left, std::uint8_t{1});
  fill_rect(out.reference, right_is_target ? left : right, std::uint8_t{1});
  return out;
}

Rendering render_white(const WhiteSpec& s) {
  detail::check_white(s);
  const auto left = layout::white_patches(s, Side::left);
  const auto right = layout::white_patches(s, Side::right);

  Image image(s.canvas.width, s.canvas.height);
  for (int y = 0; y < image.height(); ++y) {
    const auto v = stripe_level(s, y);
    std::fill(image.row(y).begin(), image.row(y).end(), v);
  }
  for (const auto& r : left) fill_rect(image, r, level(s.patch_intensity));
  for (const auto& r : right) fill_rect(image, r, level(s.patch_intensity));

  const bool right_is_target = s.carrier_convention == CarrierConvention::bright_stripes;
  return {std::move(image), rect_mask(s.canvas, right_is_target ? right : left),
          rect_mask(s.canvas, right_is_target ? left : right)};
}

Rendering render_howe(const HoweSpec& s) {
  detail::check_howe(s);
  const int w = s.base.canvas.width;
  const int h = s.base.canvas.height;
  const int width = s.crossing_line_width;

  Rendering out = render_white(s.base);
  const auto left = layout::white_patches(s.base, Side::left);
  const auto right = layout::white_patches(s.base, Side::right);
  const int half = w / 2;

  // Each patch's surround takes the colour of its flanking stripes, clipped to
  // its own half of the display.
  const auto grow = [&](const std::vector<Rect>& patches, int x_lo, int x_hi, int flank) {
    for (const auto& r : patches) {
      const int x0 = std::max(x_lo, r.x - width);
      const int x1 = std::min(x_hi, r.x + r.width + width);
      const int y0 = std::max(0, r.y - width);
      const int y1 = std::min(h, r.y + r.height + width);
      fill_rect(out.image, {x0, y0, x1 - x0, y1 - y0}, level(flank));
    }
  };
  if (width > 0) {
    grow(left, 0, half, s.base.stripe_bright);
    grow(right, half, w, s.base.stripe_dark);
    for (const auto& r : left) fill_rect(out.image, r, level(s.base.patch_intensity));
    for (const auto& r : right) fill_rect(out.image, r, level(s.base.patch_intensity));
  }

  if (width >= layout::howe_transition_width(s)) {
    // Contrast regime: the patches now sitting on a bright surround look darker.
    out.mask = rect_mask(s.base.canvas, left);
    out.reference = rect_mask(s.base.canvas, right);
  }
  return out;
}

Rendering render_shifted_white(const ShiftedWhiteSpec& s) {
  const auto g = shifted_layout(s);
  const WhiteSpec& b = s.base;
  const int w = b.canvas.width;
  const int h = b.canvas.height;

  Image image(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      image.at(x, y) =
          level(((x / g.block) + (y / g.rows)) % 2 == 0 ? b.stripe_dark : b.stripe_bright);

  const auto patch_in = [&](int col) {
    const int x0 = col * g.block;
    const int col_width = std::min(w, x0 + g.block) - x0;
    const int length = std::min(b.patch_length, col_width);
    return Rect{x0 + (col_width - length) / 2, g.band * g.rows, length, g.rows};
  };
  const Rect left = patch_in(g.left_col);    // on a dark block
  const Rect right = patch_in(g.right_col);  // on a bright block
  fill_rect(image, left, level(b.patch_intensity));
  fill_rect(image, right, level(b.patch_intensity));

  // Long stripes: the patch on the bright stripe looks darker. At the
  // checkerboard limit the reading inverts.
  bool right_is_target = s.patch_aspect > s.checkerboard_threshold;
  if (b.carrier_convention == CarrierConvention::inverted) right_is_target = !right_is_target;

  return {std::move(image), rect_mask(b.canvas, {right_is_target ? right : left}),
          rect_mask(b.canvas, {right_is_target ? left : right})};
}

}  // namespace illum
