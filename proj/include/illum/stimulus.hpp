#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "illum/image.hpp"

namespace illum {

struct Canvas {
  int width = 256;
  int height = 256;
  friend bool operator==(const Canvas&, const Canvas&) = default;
};

enum class Side { left, right };

// Simultaneous brightness contrast: one test patch on a dark half, one on a
// bright half. The patch on the bright surround is the illusory-dark target.
struct SbcSpec {
  int patch_intensity = 150;
  int dark_bg = 0;
  int bright_bg = 255;
  double patch_aspect = 0.4;  // height / width
  int patch_width = 64;
  Side bright_side = Side::right;
  // Top rows of the two patches; vertically centred when unset.
  std::optional<int> left_patch_top;
  std::optional<int> right_patch_top;
  Canvas canvas;
  friend bool operator==(const SbcSpec&, const SbcSpec&) = default;
};

// Which patch set of a White-style stimulus is designated darker.
// `bright_stripes`: the patches lying on bright stripes (their flanking stripes
// are dark).
enum class CarrierConvention { bright_stripes, inverted };

// Horizontal square-wave stripes. Left-half patches replace segments of dark
// stripes, right-half patches replace segments of bright stripes.
struct WhiteSpec {
  int stripe_period = 16;  // rows per dark+bright pair
  int stripe_dark = 0;
  int stripe_bright = 255;
  int patch_intensity = 150;
  int patch_length = 48;
  int patch_count_per_side = 1;
  CarrierConvention carrier_convention = CarrierConvention::bright_stripes;
  Canvas canvas;
  friend bool operator==(const WhiteSpec&, const WhiteSpec&) = default;
};

struct HermannSpec {
  int square_size = 32;
  int street_width = 8;
  int square_intensity = 0;
  int street_intensity = 255;
  double blob_radius = 4.0;
  int squares_per_side = 0;  // 0: as many as fit the canvas
  Canvas canvas;
  friend bool operator==(const HermannSpec&, const HermannSpec&) = default;
};

enum class GridVariant { upper, lower };

// Reconstructed grid illusion: a line grid fills the upper (or lower) half,
// one row of its cells is painted with the test gray; the mirrored half is
// plain background carrying the same gray patches at mirrored positions.
struct GridSpec {
  GridVariant variant = GridVariant::upper;
  int cell_size = 32;
  int line_width = 4;
  int patch_intensity = 150;
  int bg_intensity = 255;
  int line_intensity = 0;
  Canvas canvas;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class Waveform { square, sine };

// Grating induction: carrier modulated along x, uniform test bar across it.
struct GratingSpec {
  double cycles_per_degree = 4.0;
  double degrees_per_image = 8.0;
  Waveform waveform = Waveform::square;
  int test_bar_intensity = 128;
  int test_bar_height = 32;
  int carrier_low = 0;
  int carrier_high = 255;
  Canvas canvas;
  friend bool operator==(const GratingSpec&, const GratingSpec&) = default;
};

// White stimulus whose patches get a growing surround of their flanking
// stripe colour; large widths turn it into an SBC display.
struct HoweSpec {
  WhiteSpec base;
  int crossing_line_width = 0;
  int transition_width = -1;  // < 0: base.stripe_period / 2
  int transition_index = 0;   // position in a sweep, informational
  friend bool operator==(const HoweSpec&, const HoweSpec&) = default;
};

// Stripes broken into blocks whose phase alternates every block column.
// `patch_aspect` is block width over stripe height: large values give the
// two-halves shifted White display, 1.0 gives a checkerboard.
struct ShiftedWhiteSpec {
  WhiteSpec base;
  double patch_aspect = 16.0;
  double checkerboard_threshold = 1.0;
  friend bool operator==(const ShiftedWhiteSpec&, const ShiftedWhiteSpec&) = default;
};

struct MachBandSpec {
  int low = 64;
  int high = 192;
  int ramp_start = 96;
  int ramp_width = 64;
  int band_width = 4;
  Canvas canvas;
  friend bool operator==(const MachBandSpec&, const MachBandSpec&) = default;
};

struct CornsweetSpec {
  int plateau = 128;
  int amplitude = 32;
  int ramp_width = 32;
  Canvas canvas;
  friend bool operator==(const CornsweetSpec&, const CornsweetSpec&) = default;
};

using BaseSpec = std::variant<SbcSpec, WhiteSpec, HermannSpec, GridSpec, GratingSpec,
                              HoweSpec, ShiftedWhiteSpec, MachBandSpec, CornsweetSpec>;

struct DotInsertion {
  double radius = 3.0;
  int count = 0;  // 0: every interior intersection
  friend bool operator==(const DotInsertion&, const DotInsertion&) = default;
};

struct OrientationChange {
  double angle_deg = 45.0;
  std::optional<int> fill;  // background level; base image corner when unset
  friend bool operator==(const OrientationChange&, const OrientationChange&) = default;
};

struct NonlinearWarp {
  double amplitude = 4.0;
  double wavelength = 64.0;
  friend bool operator==(const NonlinearWarp&, const NonlinearWarp&) = default;
};

using NonIllusionTransform = std::variant<DotInsertion, OrientationChange, NonlinearWarp>;

struct NonIllusionSpec {
  BaseSpec base;
  NonIllusionTransform transform;
  friend bool operator==(const NonIllusionSpec&, const NonIllusionSpec&) = default;
};

using StimulusSpec = std::variant<SbcSpec, WhiteSpec, HermannSpec, GridSpec, GratingSpec,
                                  HoweSpec, ShiftedWhiteSpec, MachBandSpec, CornsweetSpec,
                                  NonIllusionSpec>;

enum class Family {
  sbc,
  white,
  hermann,
  grid,
  grating,
  howe,
  shifted_white,
  mach_band,
  cornsweet,
  non_illusion,
};

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);
Family family_of(const StimulusSpec& spec);
Family family_of(const BaseSpec& spec);
StimulusSpec to_stimulus(const BaseSpec& spec);

// `mask` marks the illusory-dark target; `reference` marks its physically
// identical counterpart when the family has one (empty otherwise).
struct Rendering {
  Image image;
  Mask mask;
  Mask reference;
};

Rendering render_sbc(const SbcSpec& spec);
Rendering render_white(const WhiteSpec& spec);
Rendering render_hermann(const HermannSpec& spec);
Rendering render_grid(const GridSpec& spec);
Rendering render_grating(const GratingSpec& spec);
Rendering render_howe(const HoweSpec& spec);
Rendering render_shifted_white(const ShiftedWhiteSpec& spec);
Rendering render_mach_band(const MachBandSpec& spec);
Rendering render_cornsweet(const CornsweetSpec& spec);
Rendering render_non_illusion(const NonIllusionSpec& spec);

Rendering render(const StimulusSpec& spec);
Rendering render(const BaseSpec& spec);

// Throws the same error `render` would, without rasterising.
void validate(const StimulusSpec& spec);

// Stable 16-hex-digit id derived from the family tag and parameters.
std::string stimulus_id(const StimulusSpec& spec);

// Physical intensity of the masked target, when it is a uniform region.
std::optional<int> target_intensity(const StimulusSpec& spec);

// Geometry helpers shared by renderers and exposed for tests.
namespace layout {

int sbc_patch_height(const SbcSpec& spec);
int cycles_per_image(const GratingSpec& spec);
// True when column x of the carrier lies in a bright half-cycle.
bool grating_bright_phase(int x, int cycles, int width);
int howe_transition_width(const HoweSpec& spec);
int shifted_white_block_width(const ShiftedWhiteSpec& spec);
// Patch rectangles of a White stimulus: left (on dark stripes) and right
// (on bright stripes).
std::vector<Rect> white_patches(const WhiteSpec& spec, Side side);
// Centres of interior street intersections of a Hermann grid.
struct Point {
  double x = 0;
  double y = 0;
};
std::vector<Point> hermann_intersections(const HermannSpec& spec);

}  // namespace layout

}  // namespace illum
