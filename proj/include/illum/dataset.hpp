#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "illum/stimulus.hpp"

namespace illum {

inline constexpr int kManifestSchemaVersion = 1;

// Parameter grids. Every family's grid is the cartesian product of its lists;
// invalid combinations are dropped before subsampling.
struct SbcGrid {
  std::vector<int> patch_intensities{100, 150, 200, 250};
  std::vector<double> aspects{0.2, 0.4, 0.8};
  int width_min = 8;
  int width_max = 127;
  std::vector<int> dark_bgs{0, 30, 60, 90};
  std::vector<int> bright_bgs{255};
};

struct WhiteGrid {
  std::vector<int> stripe_periods{8, 10, 12, 14, 16, 20, 24, 28, 32};
  // Patch height over length; the height is half a stripe period.
  std::vector<double> aspects{0.2, 0.4, 0.8};
  std::vector<int> patch_intensities{100, 150, 200, 250};
  std::vector<int> patch_counts{1, 2, 3};
  std::vector<std::pair<int, int>> stripe_levels{{0, 255}, {25, 255}, {50, 255}};
};

struct HermannGrid {
  int square_min = 16;
  int square_max = 47;
  std::vector<int> street_widths{4, 6, 8, 10};
  std::vector<int> square_intensities{0, 40, 80};
  std::vector<int> street_intensities{255, 200, 160};
};

struct GratingGrid {
  int cpd_min = 4;
  int cpd_max = 50;
  double degrees_per_image = 2.5;
  std::vector<Waveform> waveforms{Waveform::square, Waveform::sine};
  std::vector<int> bar_heights{8, 16, 24, 32, 40, 48, 56, 64};
  std::vector<int> bar_intensities{100, 150, 200};
  std::vector<std::pair<int, int>> carriers{{0, 255}, {50, 250}, {25, 225}};
};

struct GridGrid {
  std::vector<GridVariant> variants{GridVariant::upper, GridVariant::lower};
  int cell_min = 12;
  int cell_max = 127;
  std::vector<int> line_widths{2, 3, 4, 6, 8};
  std::vector<int> patch_intensities{100, 150, 200, 250};
  // (background, line) pairs.
  std::vector<std::pair<int, int>> levels{{255, 0}, {235, 20}, {215, 40}, {195, 60}};
};

struct NonIllusionGrid {
  std::vector<Family> base_families{Family::hermann};
  std::vector<double> dot_radii{2.0, 3.0, 4.0};
  std::vector<double> rotations{15.0, 30.0, 45.0, 60.0};
  // (amplitude, wavelength)
  std::vector<std::pair<double, double>> warps{{3.0, 64.0}, {5.0, 48.0}, {6.0, 96.0}};
  // A non-illusion must differ from its base in at least this pixel fraction.
  double min_changed_fraction = 0.01;
};

struct GalleryGrid {
  std::vector<int> howe_crossing_widths{0, 2, 4, 6, 8, 10, 12, 16, 24, 32, 48, 64};
  std::vector<double> shifted_aspects{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<int> mach_ramp_widths{16, 32, 64, 96};
  std::vector<int> cornsweet_amplitudes{8, 16, 32, 48};
  std::vector<int> patch_intensities{100, 150, 200, 250};
};

struct SweepConfig {
  std::uint64_t seed = 0;
  Canvas canvas;
  std::map<Family, int> targets{
      {Family::sbc, 4160},        {Family::white, 637},        {Family::hermann, 1024},
      {Family::grating, 6350},    {Family::grid, 10195},       {Family::non_illusion, 1149},
      {Family::howe, 0},          {Family::shifted_white, 0},  {Family::mach_band, 0},
      {Family::cornsweet, 0},
  };
  SbcGrid sbc;
  WhiteGrid white;
  HermannGrid hermann;
  GratingGrid grating;
  GridGrid grid;
  NonIllusionGrid non_illusion;
  GalleryGrid gallery;
};

// Strict: unknown keys are configuration errors, absent keys keep defaults.
SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& config);

// Every valid candidate of one family's grid, in enumeration order.
std::vector<StimulusSpec> candidates(const SweepConfig& config, Family family);

// Illusion and gallery specs, exactly targets[f] per family. Within a family
// the kept specs are the first by seeded hash of their id, so the choice does
// not depend on enumeration order.
std::vector<StimulusSpec> enumerate_sweep(const SweepConfig& config);

// Base non-illusions: transforms applied to specs of the configured base
// families, filtered by the changed-pixel floor.
std::vector<StimulusSpec> enumerate_non_illusions(const SweepConfig& config);

enum class Label { illusion, non_illusion };
enum class Provenance { rendered, augmented };

std::string_view to_string(Label label);
std::string_view to_string(Provenance provenance);

// One augmentation applied to a parent image; replayable.
struct AugmentStep {
  enum class Kind { hflip, vflip, center_crop, random_resized_crop };
  Kind kind = Kind::hflip;
  Rect crop;  // source rectangle for the crop kinds
  friend bool operator==(const AugmentStep&, const AugmentStep&) = default;
};

Image apply_augmentation(const Image& parent, const AugmentStep& step);

struct ManifestEntry {
  std::string id;
  Family family = Family::sbc;
  Label label = Label::illusion;
  StimulusSpec spec;
  std::string image_path;  // relative to the manifest directory
  std::string mask_path;
  Provenance provenance = Provenance::rendered;
  std::optional<std::string> parent_id;
  std::optional<AugmentStep> augmentation;
};

nlohmann::json to_json(const ManifestEntry& entry);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);

struct Manifest {
  std::filesystem::path root;  // directory holding manifest.jsonl
  std::vector<ManifestEntry> entries;

  std::filesystem::path file() const { return root / "manifest.jsonl"; }
  std::size_t count(Label label) const;
  const ManifestEntry* find(const std::string& id) const;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest);
void export_manifest_csv(const Manifest& manifest, const std::filesystem::path& path);

// Renders specs[i] into slot i. The parallel version fans out with OpenMP;
// the serial one is the reference it is tested and benchmarked against.
std::vector<Rendering> render_batch(const std::vector<StimulusSpec>& specs);
std::vector<Rendering> render_batch_serial(const std::vector<StimulusSpec>& specs);

struct BuildOptions {
  // Empty: every family with a nonzero target.
  std::vector<Family> families;
  bool write_csv = true;
};

// Renders every spec into out_dir/{images,masks}, writes manifest.jsonl.
// Re-running with the same config rewrites identical bytes.
Manifest build_dataset(const SweepConfig& config, const std::filesystem::path& out_dir,
                       const BuildOptions& options = {});

// Specs rendered and written as-is (used by build_dataset and by tools that
// bring their own spec lists).
Manifest write_corpus(const std::vector<StimulusSpec>& specs, const std::filesystem::path& out_dir);

struct AugmentReport {
  std::size_t added = 0;
  std::size_t duplicates_skipped = 0;
  std::optional<std::string> warning;
};

// Adds augmented non-illusions until the manifest holds target_count of them.
AugmentReport augment_non_illusions(Manifest& manifest, int target_count, std::uint64_t seed);

enum class SplitTask { identification, classification, localization };

std::string_view to_string(SplitTask task);
SplitTask split_task_from_string(std::string_view name);

struct SplitSpec {
  SplitTask task = SplitTask::localization;
  std::uint64_t seed = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

nlohmann::json to_json(const SplitSpec& split);

struct SplitSizes {
  int identification_train_illusions = 1000;
  int identification_train_non_illusions = 2000;
  int identification_test_non_illusions = 1000;
  int classification_train_per_class = 500;
  double localization_train_fraction = 0.6;
};

SplitSpec make_splits(const Manifest& manifest, SplitTask task, std::uint64_t seed,
                      const SplitSizes& sizes = {});

}  // namespace illum
