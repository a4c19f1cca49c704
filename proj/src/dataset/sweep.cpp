#include <algorithm>
#include <cmath>
#include <set>

#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/rng.hpp"
#include "illum/spec_json.hpp"

namespace illum {

using nlohmann::json;

namespace {

constexpr Family kSweepOrder[] = {Family::sbc,  Family::white, Family::hermann,
                                  Family::grating, Family::grid, Family::howe,
                                  Family::shifted_white, Family::mach_band, Family::cornsweet};

// Field lists shared by the config reader and writer.
template <typename V> void fields(Canvas& c, V&& v) {
  v("width", c.width);
  v("height", c.height);
}
template <typename V> void fields(SbcGrid& g, V&& v) {
  v("patch_intensities", g.patch_intensities);
  v("aspects", g.aspects);
  v("width_min", g.width_min);
  v("width_max", g.width_max);
  v("dark_bgs", g.dark_bgs);
  v("bright_bgs", g.bright_bgs);
}
template <typename V> void fields(WhiteGrid& g, V&& v) {
  v("stripe_periods", g.stripe_periods);
  v("aspects", g.aspects);
  v("patch_intensities", g.patch_intensities);
  v("patch_counts", g.patch_counts);
  v("stripe_levels", g.stripe_levels);
}
template <typename V> void fields(HermannGrid& g, V&& v) {
  v("square_min", g.square_min);
  v("square_max", g.square_max);
  v("street_widths", g.street_widths);
  v("square_intensities", g.square_intensities);
  v("street_intensities", g.street_intensities);
}
template <typename V> void fields(GratingGrid& g, V&& v) {
  v("cpd_min", g.cpd_min);
  v("cpd_max", g.cpd_max);
  v("degrees_per_image", g.degrees_per_image);
  v("waveforms", g.waveforms);
  v("bar_heights", g.bar_heights);
  v("bar_intensities", g.bar_intensities);
  v("carriers", g.carriers);
}
template <typename V> void fields(GridGrid& g, V&& v) {
  v("variants", g.variants);
  v("cell_min", g.cell_min);
  v("cell_max", g.cell_max);
  v("line_widths", g.line_widths);
  v("patch_intensities", g.patch_intensities);
  v("levels", g.levels);
}
template <typename V> void fields(NonIllusionGrid& g, V&& v) {
  v("base_families", g.base_families);
  v("dot_radii", g.dot_radii);
  v("rotations", g.rotations);
  v("warps", g.warps);
  v("min_changed_fraction", g.min_changed_fraction);
}
template <typename V> void fields(GalleryGrid& g, V&& v) {
  v("howe_crossing_widths", g.howe_crossing_widths);
  v("shifted_aspects", g.shifted_aspects);
  v("mach_ramp_widths", g.mach_ramp_widths);
  v("cornsweet_amplitudes", g.cornsweet_amplitudes);
  v("patch_intensities", g.patch_intensities);
}
template <typename V> void fields(SweepConfig& c, V&& v) {
  v("seed", c.seed);
  v("canvas", c.canvas);
  v("targets", c.targets);
  v("sbc", c.sbc);
  v("white", c.white);
  v("hermann", c.hermann);
  v("grating", c.grating);
  v("grid", c.grid);
  v("non_illusion", c.non_illusion);
  v("gallery", c.gallery);
}

template <typename T> struct is_vector : std::false_type {};
template <typename T> struct is_vector<std::vector<T>> : std::true_type {};
template <typename T> struct is_pair : std::false_type {};
template <typename A, typename B> struct is_pair<std::pair<A, B>> : std::true_type {};

template <typename R> json encode_record(R record);
template <typename R> void decode_record(const json& j, R& record, const std::string& ctx);

[[noreturn]] void bad(const std::string& key, const std::string& want) {
  throw Error(ErrorKind::configuration, "config key '" + key + "' must be " + want);
}

template <typename T>
json encode(const T& value) {
  if constexpr (std::is_arithmetic_v<T>) {
    return value;
  } else if constexpr (std::is_same_v<T, Family>) {
    return std::string(to_string(value));
  } else if constexpr (std::is_same_v<T, Waveform> || std::is_same_v<T, GridVariant>) {
    return to_string(value);
  } else if constexpr (is_pair<T>::value) {
    return json::array({value.first, value.second});
  } else if constexpr (is_vector<T>::value) {
    json arr = json::array();
    for (const auto& item : value) arr.push_back(encode(item));
    return arr;
  } else if constexpr (std::is_same_v<T, std::map<Family, int>>) {
    json obj = json::object();
    for (const auto& [family, n] : value) obj[std::string(to_string(family))] = n;
    return obj;
  } else {
    return encode_record(value);
  }
}

template <typename T>
void decode(const json& j, T& out, const std::string& key) {
  if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
      bad(key, "a non-negative integer");
    out = j.get<std::uint64_t>();
  } else if constexpr (std::is_same_v<T, int>) {
    if (!j.is_number_integer()) bad(key, "an integer");
    out = j.get<int>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!j.is_number()) bad(key, "a number");
    out = j.get<double>();
  } else if constexpr (std::is_same_v<T, Family>) {
    if (!j.is_string()) bad(key, "a family name");
    out = family_from_string(j.get<std::string>());
  } else if constexpr (std::is_same_v<T, Waveform>) {
    if (!j.is_string()) bad(key, "a waveform name");
    out = waveform_from_string(j.get<std::string>());
  } else if constexpr (std::is_same_v<T, GridVariant>) {
    if (!j.is_string()) bad(key, "a grid variant name");
    out = grid_variant_from_string(j.get<std::string>());
  } else if constexpr (is_pair<T>::value) {
    if (!j.is_array() || j.size() != 2) bad(key, "a two-element array");
    decode(j[0], out.first, key);
    decode(j[1], out.second, key);
  } else if constexpr (is_vector<T>::value) {
    if (!j.is_array()) bad(key, "an array");
    out.clear();
    for (const auto& item : j) {
      typename T::value_type v{};
      decode(item, v, key);
      out.push_back(v);
    }
  } else if constexpr (std::is_same_v<T, std::map<Family, int>>) {
    if (!j.is_object()) bad(key, "an object of family -> count");
    // A given target table replaces the defaults; absent families get 0.
    out.clear();
    for (const auto& item : j.items()) {
      int n = 0;
      decode(item.value(), n, key + "." + item.key());
      if (n < 0) bad(key + "." + item.key(), "a count >= 0");
      out[family_from_string(item.key())] = n;
    }
  } else {
    decode_record(j, out, key);
  }
}

template <typename R>
json encode_record(R record) {
  json j = json::object();
  fields(record, [&](const char* key, const auto& value) { j[key] = encode(value); });
  return j;
}

template <typename R>
void decode_record(const json& j, R& record, const std::string& ctx) {
  if (!j.is_object()) bad(ctx, "an object");
  std::set<std::string> known;
  fields(record, [&](const char* key, auto& value) {
    known.insert(key);
    if (auto it = j.find(key); it != j.end()) decode(*it, value, ctx.empty() ? key : ctx + "." + key);
  });
  for (const auto& item : j.items())
    if (!known.contains(item.key()))
      throw Error(ErrorKind::configuration,
                  "unknown config key '" + (ctx.empty() ? item.key() : ctx + "." + item.key()) + "'");
}

bool valid(const StimulusSpec& spec) {
  try {
    validate(spec);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::uint64_t sample_key(std::uint64_t seed, const std::string& id) {
  return hash_combine(seed, fnv1a64(id));
}

struct Keyed {
  std::uint64_t key;
  std::string id;
  StimulusSpec spec;
};

// Valid, id-deduplicated candidates ordered by seeded key.
std::vector<Keyed> keyed_valid(const std::vector<StimulusSpec>& specs, std::uint64_t seed) {
  const auto n = static_cast<std::ptrdiff_t>(specs.size());
  std::vector<std::optional<Keyed>> slots(specs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!valid(specs[i])) continue;
    auto id = stimulus_id(specs[i]);
    const auto key = sample_key(seed, id);
    slots[i] = Keyed{key, std::move(id), specs[i]};
  }
  std::vector<Keyed> out;
  std::set<std::string> ids;
  for (auto& s : slots)
    if (s && ids.insert(s->id).second) out.push_back(std::move(*s));
  std::sort(out.begin(), out.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key < b.key : a.id < b.id;
  });
  return out;
}

int target_of(const SweepConfig& config, Family family) {
  const auto it = config.targets.find(family);
  return it == config.targets.end() ? 0 : it->second;
}

std::vector<StimulusSpec> sbc_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int p : c.sbc.patch_intensities)
    for (double a : c.sbc.aspects)
      for (int w = c.sbc.width_min; w <= c.sbc.width_max; ++w)
        for (int dark : c.sbc.dark_bgs)
          for (int bright : c.sbc.bright_bgs) {
            SbcSpec s;
            s.patch_intensity = p;
            s.patch_aspect = a;
            s.patch_width = w;
            s.dark_bg = dark;
            s.bright_bg = bright;
            s.canvas = c.canvas;
            out.emplace_back(s);
          }
  return out;
}

std::vector<StimulusSpec> white_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int period : c.white.stripe_periods)
    for (double a : c.white.aspects)
      for (int p : c.white.patch_intensities)
        for (int count : c.white.patch_counts)
          for (const auto& [dark, bright] : c.white.stripe_levels) {
            WhiteSpec s;
            s.stripe_period = period;
            s.patch_length = static_cast<int>(std::lround((period / 2) / a));
            s.patch_intensity = p;
            s.patch_count_per_side = count;
            s.stripe_dark = dark;
            s.stripe_bright = bright;
            s.canvas = c.canvas;
            out.emplace_back(s);
          }
  return out;
}

std::vector<StimulusSpec> hermann_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int sq = c.hermann.square_min; sq <= c.hermann.square_max; ++sq)
    for (int st : c.hermann.street_widths)
      for (int si : c.hermann.square_intensities)
        for (int ti : c.hermann.street_intensities) {
          HermannSpec s;
          s.square_size = sq;
          s.street_width = st;
          s.square_intensity = si;
          s.street_intensity = ti;
          s.blob_radius = st / 2.0;
          s.canvas = c.canvas;
          out.emplace_back(s);
        }
  return out;
}

std::vector<StimulusSpec> grating_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int cpd = c.grating.cpd_min; cpd <= c.grating.cpd_max; ++cpd)
    for (Waveform wf : c.grating.waveforms)
      for (int bh : c.grating.bar_heights)
        for (int bi : c.grating.bar_intensities)
          for (const auto& [lo, hi] : c.grating.carriers) {
            GratingSpec s;
            s.cycles_per_degree = cpd;
            s.degrees_per_image = c.grating.degrees_per_image;
            s.waveform = wf;
            s.test_bar_height = bh;
            s.test_bar_intensity = bi;
            s.carrier_low = lo;
            s.carrier_high = hi;
            s.canvas = c.canvas;
            out.emplace_back(s);
          }
  return out;
}

std::vector<StimulusSpec> grid_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (GridVariant v : c.grid.variants)
    for (int cell = c.grid.cell_min; cell <= c.grid.cell_max; ++cell)
      for (int lw : c.grid.line_widths)
        for (int p : c.grid.patch_intensities)
          for (const auto& [bg, line] : c.grid.levels) {
            GridSpec s;
            s.variant = v;
            s.cell_size = cell;
            s.line_width = lw;
            s.patch_intensity = p;
            s.bg_intensity = bg;
            s.line_intensity = line;
            s.canvas = c.canvas;
            out.emplace_back(s);
          }
  return out;
}

WhiteSpec gallery_white(const SweepConfig& c, int patch) {
  WhiteSpec w;
  w.patch_intensity = patch;
  w.canvas = c.canvas;
  return w;
}

std::vector<StimulusSpec> howe_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int p : c.gallery.patch_intensities) {
    int index = 0;
    for (int width : c.gallery.howe_crossing_widths) {
      HoweSpec s;
      s.base = gallery_white(c, p);
      s.crossing_line_width = width;
      s.transition_index = index++;
      out.emplace_back(s);
    }
  }
  return out;
}

std::vector<StimulusSpec> shifted_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int p : c.gallery.patch_intensities)
    for (int period : {8, 16, 32})
      for (double a : c.gallery.shifted_aspects) {
        ShiftedWhiteSpec s;
        s.base = gallery_white(c, p);
        s.base.stripe_period = period;
        s.patch_aspect = a;
        out.emplace_back(s);
      }
  return out;
}

std::vector<StimulusSpec> mach_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int rw : c.gallery.mach_ramp_widths)
    for (int low : {32, 64, 96}) {
      MachBandSpec s;
      s.low = low;
      s.high = 255 - low;
      s.ramp_width = rw;
      s.ramp_start = (c.canvas.width - rw) / 2;
      s.canvas = c.canvas;
      out.emplace_back(s);
    }
  return out;
}

std::vector<StimulusSpec> cornsweet_candidates(const SweepConfig& c) {
  std::vector<StimulusSpec> out;
  for (int amp : c.gallery.cornsweet_amplitudes)
    for (int rw : {8, 16, 32})
      for (int p : c.gallery.patch_intensities) {
        CornsweetSpec s;
        s.plateau = p;
        s.amplitude = amp;
        s.ramp_width = rw;
        s.canvas = c.canvas;
        out.emplace_back(s);
      }
  return out;
}

std::vector<StimulusSpec> keep(std::vector<Keyed> keyed, std::size_t n) {
  std::vector<StimulusSpec> out;
  out.reserve(std::min(n, keyed.size()));
  for (std::size_t i = 0; i < n && i < keyed.size(); ++i) out.push_back(std::move(keyed[i].spec));
  return out;
}

double changed_fraction(const Image& a, const Image& b) {
  std::size_t diff = 0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) diff += pa[i] != pb[i];
  return pa.empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(pa.size());
}

}  // namespace

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig config;
  try {
    decode_record(j, config, "");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::configuration, std::string("malformed sweep config: ") + e.what());
  }
  return config;
}

json to_json(const SweepConfig& config) { return encode_record(config); }

std::vector<StimulusSpec> candidates(const SweepConfig& config, Family family) {
  std::vector<StimulusSpec> all;
  switch (family) {
    case Family::sbc: all = sbc_candidates(config); break;
    case Family::white: all = white_candidates(config); break;
    case Family::hermann: all = hermann_candidates(config); break;
    case Family::grating: all = grating_candidates(config); break;
    case Family::grid: all = grid_candidates(config); break;
    case Family::howe: all = howe_candidates(config); break;
    case Family::shifted_white: all = shifted_candidates(config); break;
    case Family::mach_band: all = mach_candidates(config); break;
    case Family::cornsweet: all = cornsweet_candidates(config); break;
    case Family::non_illusion:
      throw Error(ErrorKind::configuration, "non-illusions are enumerated from their bases");
  }
  std::erase_if(all, [](const StimulusSpec& s) { return !valid(s); });
  return all;
}

std::vector<StimulusSpec> enumerate_sweep(const SweepConfig& config) {
  std::vector<StimulusSpec> out;
  for (Family family : kSweepOrder) {
    const int target = target_of(config, family);
    if (target == 0) continue;
    auto keyed = keyed_valid(candidates(config, family), config.seed);
    if (keyed.size() < static_cast<std::size_t>(target))
      throw Error(ErrorKind::configuration,
                  std::string(to_string(family)) + " grid has " + std::to_string(keyed.size()) +
                      " valid specs, fewer than the target " + std::to_string(target));
    for (auto& s : keep(std::move(keyed), static_cast<std::size_t>(target))) out.push_back(std::move(s));
  }
  return out;
}

std::vector<StimulusSpec> enumerate_non_illusions(const SweepConfig& config) {
  const int target = target_of(config, Family::non_illusion);
  if (target == 0) return {};
  const auto& g = config.non_illusion;

  std::vector<NonIllusionTransform> transforms;
  for (double r : g.dot_radii) transforms.emplace_back(DotInsertion{r, 0});
  for (double a : g.rotations) transforms.emplace_back(OrientationChange{a, std::nullopt});
  for (const auto& [amp, wl] : g.warps) transforms.emplace_back(NonlinearWarp{amp, wl});

  std::vector<StimulusSpec> specs;
  for (Family f : g.base_families) {
    if (f == Family::non_illusion)
      throw Error(ErrorKind::configuration, "a non-illusion cannot be the base of another");
    for (const auto& base : candidates(config, f)) {
      const BaseSpec b = std::visit(
          [](const auto& s) -> BaseSpec {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, NonIllusionSpec>)
              throw Error(ErrorKind::configuration, "nested non-illusion");
            else
              return s;
          },
          base);
      for (const auto& t : transforms) specs.emplace_back(NonIllusionSpec{b, t});
    }
  }
  const auto keyed = keyed_valid(specs, hash_combine(config.seed, fnv1a64("non_illusion")));

  // Walk the seeded order in blocks, rendering each block in parallel and
  // accepting in order until the target is met.
  std::vector<StimulusSpec> out;
  constexpr std::size_t kBlock = 256;
  for (std::size_t start = 0; start < keyed.size() && out.size() < static_cast<std::size_t>(target);
       start += kBlock) {
    const std::size_t end = std::min(keyed.size(), start + kBlock);
    std::vector<char> ok(end - start, 0);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(start); i < static_cast<std::ptrdiff_t>(end); ++i) {
      const auto& ni = std::get<NonIllusionSpec>(keyed[i].spec);
      const auto base = render(ni.base);
      const auto moved = render_non_illusion(ni);
      ok[i - start] = changed_fraction(base.image, moved.image) >= g.min_changed_fraction;
    }
    for (std::size_t i = start; i < end && out.size() < static_cast<std::size_t>(target); ++i)
      if (ok[i - start]) out.push_back(keyed[i].spec);
  }
  if (out.size() < static_cast<std::size_t>(target))
    throw Error(ErrorKind::configuration,
                "non_illusion grid yields " + std::to_string(out.size()) +
                    " valid specs, fewer than the target " + std::to_string(target));
  return out;
}

}  // namespace illum
