#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_set>

#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/png_io.hpp"
#include "illum/rng.hpp"

namespace illum {

namespace {

std::string hex_id(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AugmentStep draw_step(CounterRng& rng, int width, int height) {
  AugmentStep step;
  step.kind = static_cast<AugmentStep::Kind>(rng.below(4));
  step.crop = {0, 0, width, height};
  if (step.kind == AugmentStep::Kind::center_crop) {
    const double scale = rng.uniform(0.6, 0.9);
    const int cw = std::max(8, static_cast<int>(std::lround(scale * width)));
    const int ch = std::max(8, static_cast<int>(std::lround(scale * height)));
    step.crop = {(width - cw) / 2, (height - ch) / 2, cw, ch};
  } else if (step.kind == AugmentStep::Kind::random_resized_crop) {
    const double area = rng.uniform(0.3, 1.0) * width * height;
    const double ratio = std::exp(rng.uniform(std::log(3.0 / 4.0), std::log(4.0 / 3.0)));
    const int cw = std::clamp(static_cast<int>(std::lround(std::sqrt(area * ratio))), 8, width);
    const int ch = std::clamp(static_cast<int>(std::lround(std::sqrt(area / ratio))), 8, height);
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(width - cw + 1)));
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(height - ch + 1)));
    step.crop = {x, y, cw, ch};
  }
  return step;
}

std::uint64_t step_hash(const AugmentStep& s) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(s.kind));
  for (int v : {s.crop.x, s.crop.y, s.crop.width, s.crop.height})
    h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
  return h;
}

}  // namespace

Image apply_augmentation(const Image& parent, const AugmentStep& step) {
  switch (step.kind) {
    case AugmentStep::Kind::hflip: return flip_horizontal(parent);
    case AugmentStep::Kind::vflip: return flip_vertical(parent);
    case AugmentStep::Kind::center_crop:
    case AugmentStep::Kind::random_resized_crop:
      if (step.crop.width < 1 || step.crop.height < 1 || step.crop.x < 0 || step.crop.y < 0 ||
          step.crop.x + step.crop.width > parent.width() ||
          step.crop.y + step.crop.height > parent.height())
        throw Error(ErrorKind::parameter, "augmentation crop lies outside the parent image");
      return crop_resize_nearest(parent, step.crop, parent.width(), parent.height());
  }
  throw Error(ErrorKind::parameter, "unknown augmentation kind");
}

AugmentReport augment_non_illusions(Manifest& manifest, int target_count, std::uint64_t seed) {
  AugmentReport report;
  std::vector<const ManifestEntry*> bases;
  for (const auto& e : manifest.entries)
    if (e.label == Label::non_illusion && e.provenance == Provenance::rendered) bases.push_back(&e);
  if (bases.empty())
    throw Error(ErrorKind::precondition, "manifest holds no rendered non-illusion to augment");

  const auto current = static_cast<int>(manifest.count(Label::non_illusion));
  if (target_count <= current) {
    if (target_count < current)
      report.warning = "target " + std::to_string(target_count) + " is below the current " +
                       std::to_string(current) + " non-illusions; nothing added";
    return report;
  }

  // Parent images are read once; every existing non-illusion seeds the
  // duplicate filter.
  std::map<std::string, Image> parents;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& e : manifest.entries) {
    if (e.label != Label::non_illusion) continue;
    Image img = read_png(manifest.root / e.image_path);
    seen.insert(content_hash(img));
    if (e.provenance == Provenance::rendered) parents.emplace(e.id, std::move(img));
  }

  struct Accepted {
    ManifestEntry entry;
    Image image;
  };
  std::vector<Accepted> accepted;
  const int needed = target_count - current;
  const long long max_attempts = 50LL * needed + 1000;
  CounterRng rng(seed, "augment");
  for (long long attempt = 0; static_cast<int>(accepted.size()) < needed; ++attempt) {
    if (attempt >= max_attempts)
      throw Error(ErrorKind::configuration,
                  "augmentation found only " + std::to_string(accepted.size()) + " of " +
                      std::to_string(needed) + " distinct images");
    const ManifestEntry& parent = *bases[rng.below(bases.size())];
    const Image& src = parents.at(parent.id);
    const AugmentStep step = draw_step(rng, src.width(), src.height());
    Image image = apply_augmentation(src, step);
    if (!seen.insert(content_hash(image)).second) {
      ++report.duplicates_skipped;
      continue;
    }
    ManifestEntry e;
    e.id = hex_id(hash_combine(fnv1a64(parent.id), step_hash(step)));
    e.family = Family::non_illusion;
    e.label = Label::non_illusion;
    e.spec = parent.spec;
    e.image_path = "images/" + e.id + ".png";
    e.mask_path = "masks/" + e.id + "_mask.png";
    e.provenance = Provenance::augmented;
    e.parent_id = parent.id;
    e.augmentation = step;
    accepted.push_back({std::move(e), std::move(image)});
  }

  const auto n = static_cast<std::ptrdiff_t>(accepted.size());
  std::vector<std::exception_ptr> errors(accepted.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& a = accepted[i];
      write_png(manifest.root / a.entry.image_path, a.image);
      write_mask_png(manifest.root / a.entry.mask_path, Mask(a.image.width(), a.image.height()));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& ex) {
      throw Error(ErrorKind::io, accepted[i].entry.id + ": " + ex.what());
    }
  }

  for (auto& a : accepted) manifest.entries.push_back(std::move(a.entry));
  report.added = accepted.size();
  save_manifest(manifest);
  return report;
}

}  // namespace illum
