#include <algorithm>
#include <exception>
#include <mutex>

#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/png_io.hpp"

namespace illum {

namespace fs = std::filesystem;

namespace {

ManifestEntry entry_for(const StimulusSpec& spec, std::string id) {
  ManifestEntry e;
  e.family = family_of(spec);
  e.label = e.family == Family::non_illusion ? Label::non_illusion : Label::illusion;
  e.spec = spec;
  e.image_path = "images/" + id + ".png";
  e.mask_path = "masks/" + id + "_mask.png";
  e.id = std::move(id);
  return e;
}

// First failure by index, so the reported id does not depend on scheduling.
class FirstError {
 public:
  void record(std::size_t index, std::exception_ptr error) {
    std::lock_guard lock(mu_);
    if (!error_ || index < index_) {
      index_ = index;
      error_ = error;
    }
  }
  void rethrow(const std::vector<std::string>& ids) const {
    if (!error_) return;
    try {
      std::rethrow_exception(error_);
    } catch (const Error& e) {
      throw Error(e.kind(), ids[index_] + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::io, ids[index_] + ": " + e.what());
    }
  }

 private:
  std::mutex mu_;
  std::size_t index_ = 0;
  std::exception_ptr error_;
};

}  // namespace

std::vector<Rendering> render_batch(const std::vector<StimulusSpec>& specs) {
  std::vector<Rendering> out(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  const auto n = static_cast<std::ptrdiff_t>(specs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = render(specs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<Rendering> render_batch_serial(const std::vector<StimulusSpec>& specs) {
  std::vector<Rendering> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(render(s));
  return out;
}

Manifest write_corpus(const std::vector<StimulusSpec>& specs, const fs::path& out_dir) {
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "masks");

  Manifest manifest;
  manifest.root = out_dir;
  std::vector<std::string> ids(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) ids[i] = stimulus_id(specs[i]);
  for (std::size_t i = 0; i < specs.size(); ++i) manifest.entries.push_back(entry_for(specs[i], ids[i]));

  FirstError failure;
  const auto n = static_cast<std::ptrdiff_t>(specs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto r = render(specs[i]);
      write_png(out_dir / manifest.entries[i].image_path, r.image);
      write_mask_png(out_dir / manifest.entries[i].mask_path, r.mask);
    } catch (...) {
      failure.record(static_cast<std::size_t>(i), std::current_exception());
    }
  }
  // Completed files are whole (atomic rename) and deterministic, so a failed
  // build resumes by running again.
  failure.rethrow(ids);
  return manifest;
}

Manifest build_dataset(const SweepConfig& config, const fs::path& out_dir,
                       const BuildOptions& options) {
  SweepConfig effective = config;
  if (!options.families.empty()) {
    for (auto& [family, target] : effective.targets) {
      const bool wanted = std::find(options.families.begin(), options.families.end(), family) !=
                          options.families.end();
      if (!wanted) target = 0;
    }
  }
  auto specs = enumerate_sweep(effective);
  for (auto& s : enumerate_non_illusions(effective)) specs.push_back(std::move(s));

  Manifest manifest = write_corpus(specs, out_dir);
  save_manifest(manifest);
  if (options.write_csv) export_manifest_csv(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace illum
