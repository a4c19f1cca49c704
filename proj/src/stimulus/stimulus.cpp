#include "illum/stimulus.hpp"

#include <array>
#include <utility>

#include "checks.hpp"
#include "illum/error.hpp"

namespace illum {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 10> kFamilies{{
    {Family::sbc, "sbc"},
    {Family::white, "white"},
    {Family::hermann, "hermann"},
    {Family::grid, "grid"},
    {Family::grating, "grating"},
    {Family::howe, "howe"},
    {Family::shifted_white, "shifted_white"},
    {Family::mach_band, "mach_band"},
    {Family::cornsweet, "cornsweet"},
    {Family::non_illusion, "non_illusion"},
}};

template <typename T>
constexpr Family family_for() {
  if constexpr (std::is_same_v<T, SbcSpec>) return Family::sbc;
  else if constexpr (std::is_same_v<T, WhiteSpec>) return Family::white;
  else if constexpr (std::is_same_v<T, HermannSpec>) return Family::hermann;
  else if constexpr (std::is_same_v<T, GridSpec>) return Family::grid;
  else if constexpr (std::is_same_v<T, GratingSpec>) return Family::grating;
  else if constexpr (std::is_same_v<T, HoweSpec>) return Family::howe;
  else if constexpr (std::is_same_v<T, ShiftedWhiteSpec>) return Family::shifted_white;
  else if constexpr (std::is_same_v<T, MachBandSpec>) return Family::mach_band;
  else if constexpr (std::is_same_v<T, CornsweetSpec>) return Family::cornsweet;
  else return Family::non_illusion;
}

struct Renderer {
  Rendering operator()(const SbcSpec& s) const { return render_sbc(s); }
  Rendering operator()(const WhiteSpec& s) const { return render_white(s); }
  Rendering operator()(const HermannSpec& s) const { return render_hermann(s); }
  Rendering operator()(const GridSpec& s) const { return render_grid(s); }
  Rendering operator()(const GratingSpec& s) const { return render_grating(s); }
  Rendering operator()(const HoweSpec& s) const { return render_howe(s); }
  Rendering operator()(const ShiftedWhiteSpec& s) const { return render_shifted_white(s); }
  Rendering operator()(const MachBandSpec& s) const { return render_mach_band(s); }
  Rendering operator()(const CornsweetSpec& s) const { return render_cornsweet(s); }
  Rendering operator()(const NonIllusionSpec& s) const { return render_non_illusion(s); }
};

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& [f, name] : kFamilies)
    if (f == family) return name;
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (const auto& [f, n] : kFamilies)
    if (n == name) return f;
  throw Error(ErrorKind::configuration, "unknown stimulus family '" + std::string(name) + "'");
}

Family family_of(const StimulusSpec& spec) {
  return std::visit([](const auto& s) { return family_for<std::decay_t<decltype(s)>>(); }, spec);
}

Family family_of(const BaseSpec& spec) {
  return std::visit([](const auto& s) { return family_for<std::decay_t<decltype(s)>>(); }, spec);
}

StimulusSpec to_stimulus(const BaseSpec& spec) {
  return std::visit([](const auto& s) { return StimulusSpec(s); }, spec);
}

Rendering render(const StimulusSpec& spec) { return std::visit(Renderer{}, spec); }
Rendering render(const BaseSpec& spec) { return std::visit(Renderer{}, spec); }

void validate(const StimulusSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NonIllusionSpec>) detail::check_non_illusion(s);
        else detail::check_base(BaseSpec(s));
      },
      spec);
}

std::optional<int> target_intensity(const StimulusSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::optional<int> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SbcSpec> || std::is_same_v<T, WhiteSpec> ||
                      std::is_same_v<T, GridSpec>)
          return s.patch_intensity;
        else if constexpr (std::is_same_v<T, HoweSpec> || std::is_same_v<T, ShiftedWhiteSpec>)
          return s.base.patch_intensity;
        else if constexpr (std::is_same_v<T, GratingSpec>)
          return s.test_bar_intensity;
        else if constexpr (std::is_same_v<T, CornsweetSpec>)
          return s.plateau;
        else
          return std::nullopt;
      },
      spec);
}

}  // namespace illum
