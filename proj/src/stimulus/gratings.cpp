// Luminance-profile displays: grating induction, Mach bands, Cornsweet edge.
#include <algorithm>
#include <cmath>
#include <numbers>

#include "checks.hpp"
#include "illum/stimulus.hpp"

namespace illum {

using detail::check_canvas;
using detail::check_level;
using detail::level;
using detail::require;

namespace layout {

int cycles_per_image(const GratingSpec& spec) {
  return static_cast<int>(std::lround(spec.cycles_per_degree * spec.degrees_per_image));
}

bool grating_bright_phase(int x, int cycles, int width) {
  // Phase of the pixel centre, in half-cycles: (2x + 1) * cycles / width.
  const long long num = (2LL * x + 1) * cycles;
  return num % (2LL * width) < width;
}

}  // namespace layout

void detail::check_grating(const GratingSpec& s) {
  check_canvas(s.canvas);
  check_level(s.test_bar_intensity, "test_bar_intensity");
  check_level(s.carrier_low, "carrier_low");
  check_level(s.carrier_high, "carrier_high");
  require(std::isfinite(s.cycles_per_degree) && s.cycles_per_degree >= 4.0 &&
              s.cycles_per_degree <= 50.0,
          ErrorKind::parameter, "cycles_per_degree must lie in [4, 50]");
  detail::check_finite_positive(s.degrees_per_image, "degrees_per_image");
  const int cycles = layout::cycles_per_image(s);
  require(cycles >= 1 && cycles <= s.canvas.width / 2, ErrorKind::parameter,
          "grating has " + std::to_string(cycles) + " cycles per image; allowed 1.." +
              std::to_string(s.canvas.width / 2));
  require(s.test_bar_height >= 1 && s.test_bar_height <= s.canvas.height, ErrorKind::parameter,
          "test_bar_height must lie in [1, canvas height]");
  require(s.carrier_low < s.carrier_high, ErrorKind::parameter,
          "carrier_low must be below carrier_high");
}

void detail::check_mach_band(const MachBandSpec& s) {
  check_canvas(s.canvas);
  check_level(s.low, "low");
  check_level(s.high, "high");
  require(s.low < s.high, ErrorKind::parameter, "Mach band needs low < high");
  require(s.ramp_width >= 1, ErrorKind::parameter, "ramp_width must be >= 1");
  require(s.ramp_start >= 1 && s.ramp_start + s.ramp_width <= s.canvas.width - 1,
          ErrorKind::parameter, "ramp leaves no plateau on one side");
  require(s.band_width >= 1, ErrorKind::parameter, "band_width must be >= 1");
}

void detail::check_cornsweet(const CornsweetSpec& s) {
  check_canvas(s.canvas);
  check_level(s.plateau, "plateau");
  require(s.amplitude >= 1, ErrorKind::parameter, "amplitude must be >= 1");
  require(s.plateau - s.amplitude >= 0 && s.plateau + s.amplitude <= 255, ErrorKind::parameter,
          "plateau +/- amplitude must stay within [0, 255]");
  require(s.ramp_width >= 1, ErrorKind::parameter, "ramp_width must be >= 1");
  const int edge = s.canvas.width / 2;
  require(edge - s.ramp_width >= 1 && edge + s.ramp_width <= s.canvas.width - 1,
          ErrorKind::parameter, "ramps leave no plateau on one side");
}

Rendering render_grating(const GratingSpec& s) {
  detail::check_grating(s);
  const int w = s.canvas.width;
  const int h = s.canvas.height;
  const int cycles = layout::cycles_per_image(s);

  std::vector<std::uint8_t> profile(static_cast<std::size_t>(w));
  const double mean = (s.carrier_low + s.carrier_high) / 2.0;
  const double amplitude = (s.carrier_high - s.carrier_low) / 2.0;
  for (int x = 0; x < w; ++x) {
    if (s.waveform == Waveform::square) {
      profile[x] = level(layout::grating_bright_phase(x, cycles, w) ? s.carrier_high : s.carrier_low);
    } else {
      const double phase = 2.0 * std::numbers::pi * (x + 0.5) * cycles / w;
      const long v = std::lround(mean + amplitude * std::sin(phase));
      profile[x] = level(static_cast<int>(std::clamp<long>(v, s.carrier_low, s.carrier_high)));
    }
  }

  Rendering out{Image(w, h), Mask(w, h), Mask(w, h)};
  for (int y = 0; y < h; ++y) std::copy(profile.begin(), profile.end(), out.image.row(y).begin());

  const int top = (h - s.test_bar_height) / 2;
  for (int y = top; y < top + s.test_bar_height; ++y) {
    for (int x = 0; x < w; ++x) {
      out.image.at(x, y) = level(s.test_bar_intensity);
      // Bar segments flanked by the bright carrier phase are induced darker.
      if (layout::grating_bright_phase(x, cycles, w))
        out.mask.at(x, y) = 1;
      else
        out.reference.at(x, y) = 1;
    }
  }
  return out;
}

Rendering render_mach_band(const MachBandSpec& s) {
  detail::check_mach_band(s);
  const int w = s.canvas.width;
  const int h = s.canvas.height;
  Rendering out{Image(w, h), Mask(w, h), Mask(w, h)};
  for (int x = 0; x < w; ++x) {
    int v = s.high;
    if (x < s.ramp_start) {
      v = s.low;
    } else if (x < s.ramp_start + s.ramp_width) {
      v = s.low + static_cast<int>(std::lround(static_cast<double>(s.high - s.low) *
                                               (x - s.ramp_start) / s.ramp_width));
    }
    for (int y = 0; y < h; ++y) out.image.at(x, y) = level(v);
  }
  // Dark band straddles the low-side knee.
  fill_rect(out.mask, {s.ramp_start - s.band_width / 2, 0, s.band_width, h}, std::uint8_t{1});
  return out;
}

Rendering render_cornsweet(const CornsweetSpec& s) {
  detail::check_cornsweet(s);
  const int w = s.canvas.width;
  const int h = s.canvas.height;
  const int edge = w / 2;

  Rendering out{Image(w, h), Mask(w, h), Mask(w, h)};
  for (int x = 0; x < w; ++x) {
    int v = s.plateau;
    if (x >= edge - s.ramp_width && x < edge) {
      v = s.plateau + static_cast<int>(std::lround(static_cast<double>(s.amplitude) *
                                                   (x - (edge - s.ramp_width) + 1) / s.ramp_width));
    } else if (x >= edge && x < edge + s.ramp_width) {
      v = s.plateau - static_cast<int>(std::lround(static_cast<double>(s.amplitude) *
                                                   (edge + s.ramp_width - x) / s.ramp_width));
    }
    for (int y = 0; y < h; ++y) out.image.at(x, y) = level(v);
  }
  fill_rect(out.mask, {edge + s.ramp_width, 0, w - edge - s.ramp_width, h}, std::uint8_t{1});
  fill_rect(out.reference, {0, 0, edge - s.ramp_width, h}, std::uint8_t{1});
  return out;
}

}  // namespace illum
