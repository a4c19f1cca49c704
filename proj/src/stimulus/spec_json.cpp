#include "illum/spec_json.hpp"

#include <array>
#include <cstdio>
#include <set>
#include <utility>

#include "illum/error.hpp"
#include "illum/rng.hpp"

namespace illum {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
using EnumTable = std::array<std::pair<E, const char*>, N>;

constexpr EnumTable<Side, 2> kSides{{{Side::left, "left"}, {Side::right, "right"}}};
constexpr EnumTable<Waveform, 2> kWaveforms{{{Waveform::square, "square"}, {Waveform::sine, "sine"}}};
constexpr EnumTable<GridVariant, 2> kVariants{
    {{GridVariant::upper, "upper"}, {GridVariant::lower, "lower"}}};
constexpr EnumTable<CarrierConvention, 2> kConventions{
    {{CarrierConvention::bright_stripes, "bright_stripes"}, {CarrierConvention::inverted, "inverted"}}};

template <typename E, std::size_t N>
const char* enum_name(const EnumTable<E, N>& table, E value) {
  for (const auto& [e, name] : table)
    if (e == value) return name;
  return "?";
}

template <typename E, std::size_t N>
E enum_value(const EnumTable<E, N>& table, const json& j, const std::string& key) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    for (const auto& [e, name] : table)
      if (s == name) return e;
  }
  throw Error(ErrorKind::configuration, "invalid value for '" + key + "': " + j.dump());
}

template <typename E>
constexpr bool is_enum_v = std::is_same_v<E, Side> || std::is_same_v<E, Waveform> ||
                           std::is_same_v<E, GridVariant> || std::is_same_v<E, CarrierConvention>;

template <typename E>
const auto& table_for() {
  if constexpr (std::is_same_v<E, Side>) return kSides;
  else if constexpr (std::is_same_v<E, Waveform>) return kWaveforms;
  else if constexpr (std::is_same_v<E, GridVariant>) return kVariants;
  else return kConventions;
}

// One field list per record, shared by the reader and the writer.
template <typename V> void fields(Canvas& s, V&& v) {
  v("width", s.width);
  v("height", s.height);
}
template <typename V> void fields(SbcSpec& s, V&& v) {
  v("patch_intensity", s.patch_intensity);
  v("dark_bg", s.dark_bg);
  v("bright_bg", s.bright_bg);
  v("patch_aspect", s.patch_aspect);
  v("patch_width", s.patch_width);
  v("bright_side", s.bright_side);
  v("left_patch_top", s.left_patch_top);
  v("right_patch_top", s.right_patch_top);
  v("canvas", s.canvas);
}
template <typename V> void fields(WhiteSpec& s, V&& v) {
  v("stripe_period", s.stripe_period);
  v("stripe_dark", s.stripe_dark);
  v("stripe_bright", s.stripe_bright);
  v("patch_intensity", s.patch_intensity);
  v("patch_length", s.patch_length);
  v("patch_count_per_side", s.patch_count_per_side);
  v("carrier_convention", s.carrier_convention);
  v("canvas", s.canvas);
}
template <typename V> void fields(HermannSpec& s, V&& v) {
  v("square_size", s.square_size);
  v("street_width", s.street_width);
  v("square_intensity", s.square_intensity);
  v("street_intensity", s.street_intensity);
  v("blob_radius", s.blob_radius);
  v("squares_per_side", s.squares_per_side);
  v("canvas", s.canvas);
}
template <typename V> void fields(GridSpec& s, V&& v) {
  v("variant", s.variant);
  v("cell_size", s.cell_size);
  v("line_width", s.line_width);
  v("patch_intensity", s.patch_intensity);
  v("bg_intensity", s.bg_intensity);
  v("line_intensity", s.line_intensity);
  v("canvas", s.canvas);
}
template <typename V> void fields(GratingSpec& s, V&& v) {
  v("cycles_per_degree", s.cycles_per_degree);
  v("degrees_per_image", s.degrees_per_image);
  v("waveform", s.waveform);
  v("test_bar_intensity", s.test_bar_intensity);
  v("test_bar_height", s.test_bar_height);
  v("carrier_low", s.carrier_low);
  v("carrier_high", s.carrier_high);
  v("canvas", s.canvas);
}
template <typename V> void fields(HoweSpec& s, V&& v) {
  v("base", s.base);
  v("crossing_line_width", s.crossing_line_width);
  v("transition_width", s.transition_width);
  v("transition_index", s.transition_index);
}
template <typename V> void fields(ShiftedWhiteSpec& s, V&& v) {
  v("base", s.base);
  v("patch_aspect", s.patch_aspect);
  v("checkerboard_threshold", s.checkerboard_threshold);
}
template <typename V> void fields(MachBandSpec& s, V&& v) {
  v("low", s.low);
  v("high", s.high);
  v("ramp_start", s.ramp_start);
  v("ramp_width", s.ramp_width);
  v("band_width", s.band_width);
  v("canvas", s.canvas);
}
template <typename V> void fields(CornsweetSpec& s, V&& v) {
  v("plateau", s.plateau);
  v("amplitude", s.amplitude);
  v("ramp_width", s.ramp_width);
  v("canvas", s.canvas);
}
template <typename V> void fields(DotInsertion& s, V&& v) {
  v("radius", s.radius);
  v("count", s.count);
}
template <typename V> void fields(OrientationChange& s, V&& v) {
  v("angle_deg", s.angle_deg);
  v("fill", s.fill);
}
template <typename V> void fields(NonlinearWarp& s, V&& v) {
  v("amplitude", s.amplitude);
  v("wavelength", s.wavelength);
}
template <typename V> void fields(NonIllusionSpec& s, V&& v) {
  v("base", s.base);
  v("transform", s.transform);
}

template <typename T>
constexpr const char* transform_name() {
  if constexpr (std::is_same_v<T, DotInsertion>) return "dot_insertion";
  else if constexpr (std::is_same_v<T, OrientationChange>) return "orientation_change";
  else return "nonlinear_warp";
}

json encode_base(const BaseSpec& spec);
BaseSpec decode_base(const json& j);
template <typename R> json encode_record(R record);
template <typename R> R decode_record(const json& j, const std::string& context);

template <typename T>
json encode(const T& value) {
  if constexpr (std::is_same_v<T, int> || std::is_same_v<T, double>) {
    return value;
  } else if constexpr (is_enum_v<T>) {
    return enum_name(table_for<T>(), value);
  } else if constexpr (std::is_same_v<T, std::optional<int>>) {
    return value ? json(*value) : json(nullptr);
  } else if constexpr (std::is_same_v<T, BaseSpec>) {
    return encode_base(value);
  } else if constexpr (std::is_same_v<T, NonIllusionTransform>) {
    return std::visit(
        [](const auto& t) {
          json j = encode_record(t);
          j["kind"] = transform_name<std::decay_t<decltype(t)>>();
          return j;
        },
        value);
  } else {
    return encode_record(value);
  }
}

template <typename T>
void decode(const json& j, T& out, const std::string& key) {
  if constexpr (std::is_same_v<T, int>) {
    if (!j.is_number_integer())
      throw Error(ErrorKind::configuration, "'" + key + "' must be an integer");
    out = j.get<int>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!j.is_number()) throw Error(ErrorKind::configuration, "'" + key + "' must be a number");
    out = j.get<double>();
  } else if constexpr (is_enum_v<T>) {
    out = enum_value(table_for<T>(), j, key);
  } else if constexpr (std::is_same_v<T, std::optional<int>>) {
    if (j.is_null()) {
      out.reset();
    } else {
      int v = 0;
      decode(j, v, key);
      out = v;
    }
  } else if constexpr (std::is_same_v<T, BaseSpec>) {
    out = decode_base(j);
  } else if constexpr (std::is_same_v<T, NonIllusionTransform>) {
    if (!j.is_object() || !j.contains("kind"))
      throw Error(ErrorKind::configuration, "'" + key + "' must be an object with a 'kind'");
    json params = j;
    const auto kind = params["kind"].get<std::string>();
    params.erase("kind");
    if (kind == "dot_insertion") out = decode_record<DotInsertion>(params, kind);
    else if (kind == "orientation_change") out = decode_record<OrientationChange>(params, kind);
    else if (kind == "nonlinear_warp") out = decode_record<NonlinearWarp>(params, kind);
    else throw Error(ErrorKind::configuration, "unknown transform kind '" + kind + "'");
  } else {
    out = decode_record<T>(j, key);
  }
}

template <typename R>
json encode_record(R record) {
  json j = json::object();
  fields(record, [&](const char* key, const auto& value) { j[key] = encode(value); });
  return j;
}

template <typename R>
R decode_record(const json& j, const std::string& context) {
  if (!j.is_object()) throw Error(ErrorKind::configuration, "'" + context + "' must be an object");
  R record{};
  std::set<std::string> known;
  fields(record, [&](const char* key, auto& value) {
    known.insert(key);
    if (auto it = j.find(key); it != j.end()) decode(*it, value, key);
  });
  for (const auto& item : j.items())
    if (!known.contains(item.key()))
      throw Error(ErrorKind::configuration, context + ": unknown key '" + item.key() + "'");
  return record;
}

template <typename Variant>
json encode_tagged(const Variant& spec) {
  return std::visit(
      [&](const auto& s) {
        return json{{"family", std::string(to_string(family_of(spec)))},
                    {"params", encode_record(s)}};
      },
      spec);
}

json encode_base(const BaseSpec& spec) { return encode_tagged(spec); }

template <typename Variant>
Variant decode_tagged(const json& j) {
  if (!j.is_object() || !j.contains("family"))
    throw Error(ErrorKind::configuration, "stimulus spec needs a 'family' tag");
  for (const auto& item : j.items())
    if (item.key() != "family" && item.key() != "params")
      throw Error(ErrorKind::configuration, "stimulus spec: unknown key '" + item.key() + "'");
  const auto family = family_from_string(j.at("family").get<std::string>());
  const json params = j.value("params", json::object());
  const std::string ctx(to_string(family));
  switch (family) {
    case Family::sbc: return decode_record<SbcSpec>(params, ctx);
    case Family::white: return decode_record<WhiteSpec>(params, ctx);
    case Family::hermann: return decode_record<HermannSpec>(params, ctx);
    case Family::grid: return decode_record<GridSpec>(params, ctx);
    case Family::grating: return decode_record<GratingSpec>(params, ctx);
    case Family::howe: return decode_record<HoweSpec>(params, ctx);
    case Family::shifted_white: return decode_record<ShiftedWhiteSpec>(params, ctx);
    case Family::mach_band: return decode_record<MachBandSpec>(params, ctx);
    case Family::cornsweet: return decode_record<CornsweetSpec>(params, ctx);
    case Family::non_illusion:
      if constexpr (std::is_same_v<Variant, StimulusSpec>)
        return decode_record<NonIllusionSpec>(params, ctx);
      else
        throw Error(ErrorKind::compatibility, "a non-illusion cannot be the base of another");
  }
  throw Error(ErrorKind::configuration, "unhandled family");
}

BaseSpec decode_base(const json& j) { return decode_tagged<BaseSpec>(j); }

}  // namespace

std::string to_string(Side v) { return enum_name(kSides, v); }
std::string to_string(Waveform v) { return enum_name(kWaveforms, v); }
std::string to_string(GridVariant v) { return enum_name(kVariants, v); }
std::string to_string(CarrierConvention v) { return enum_name(kConventions, v); }

Waveform waveform_from_string(std::string_view name) {
  return enum_value(kWaveforms, json(std::string(name)), "waveform");
}
GridVariant grid_variant_from_string(std::string_view name) {
  return enum_value(kVariants, json(std::string(name)), "variant");
}

json to_json(const StimulusSpec& spec) { return encode_tagged(spec); }
json to_json(const BaseSpec& spec) { return encode_tagged(spec); }

StimulusSpec stimulus_from_json(const json& j) {
  try {
    return decode_tagged<StimulusSpec>(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::configuration, std::string("malformed stimulus spec: ") + e.what());
  }
}

std::string stimulus_id(const StimulusSpec& spec) {
  // nlohmann objects are key-sorted, so the dump is canonical.
  const auto text = to_json(spec).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(splitmix64(fnv1a64(text))));
  return buf;
}

}  // namespace illum
