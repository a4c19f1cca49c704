#pragma once

#include <cmath>
#include <string>

#include "illum/error.hpp"
#include "illum/stimulus.hpp"

namespace illum::detail {

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

inline void check_level(int value, const char* name) {
  require(value >= 0 && value <= 255, ErrorKind::parameter,
          std::string(name) + " must be a gray level in [0, 255], got " + std::to_string(value));
}

inline void check_canvas(const Canvas& canvas) {
  require(canvas.width >= 4 && canvas.height >= 4 && canvas.width <= 8192 &&
              canvas.height <= 8192,
          ErrorKind::dimension,
          "canvas must be between 4x4 and 8192x8192, got " + std::to_string(canvas.width) + "x" +
              std::to_string(canvas.height));
}

inline void check_finite_positive(double value, const char* name) {
  require(std::isfinite(value) && value > 0.0, ErrorKind::parameter,
          std::string(name) + " must be finite and > 0");
}

inline std::uint8_t level(int value) { return static_cast<std::uint8_t>(value); }

// Cheap precondition checks, one per family; each throws what the matching
// renderer would throw.
void check_sbc(const SbcSpec& s);
void check_white(const WhiteSpec& s);
void check_hermann(const HermannSpec& s);
void check_grid(const GridSpec& s);
void check_grating(const GratingSpec& s);
void check_howe(const HoweSpec& s);
void check_shifted_white(const ShiftedWhiteSpec& s);
void check_mach_band(const MachBandSpec& s);
void check_cornsweet(const CornsweetSpec& s);
void check_non_illusion(const NonIllusionSpec& s);
void check_base(const BaseSpec& s);

}  // namespace illum::detail
