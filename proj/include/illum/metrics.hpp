#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "illum/dataset.hpp"
#include "illum/image.hpp"

namespace illum {

struct LossConfig {
  double alpha = 0.4;  // MSE weight
  double beta = 0.6;   // (1 - SSIM) weight
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double dynamic_range = 1.0;
  // Stabilisers; (0.01 R)^2 and (0.03 R)^2 when unset.
  std::optional<double> c1;
  std::optional<double> c2;

  double resolved_c1() const { return c1.value_or((0.01 * dynamic_range) * (0.01 * dynamic_range)); }
  double resolved_c2() const { return c2.value_or((0.03 * dynamic_range) * (0.03 * dynamic_range)); }
};

void validate(const LossConfig& cfg);

double mse(const ResponseMap& a, const ResponseMap& b);

// Mean local SSIM over the valid region of a Gaussian window (no padding).
double ssim(const ResponseMap& a, const ResponseMap& b, const LossConfig& cfg = {});
// Single-threaded reference of the same computation.
double ssim_serial(const ResponseMap& a, const ResponseMap& b, const LossConfig& cfg = {});

// alpha * mse + beta * (1 - ssim).
double combined_loss(const ResponseMap& pred, const ResponseMap& target, const LossConfig& cfg = {});

inline constexpr double kDefaultThreshold = 0.22;

// bit = 1 iff value >= threshold.
Mask binarize(const ResponseMap& response, double threshold = kDefaultThreshold);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

struct MetricsReport {
  double pixel_accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double miou = 0;
};

// Ratios with a zero denominator are 1 when prediction and ground truth are
// both empty (vacuous agreement) and 0 otherwise. IoU of a class whose union
// is empty is 1.
MetricsReport report_from_confusion(const Confusion& c);
Confusion confusion(const Mask& pred, const Mask& gt);
MetricsReport segmentation_metrics(const Mask& pred, const Mask& gt);

struct ClassificationReport {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [gt][pred]
};

// Two classes including "illusion": binary metrics with "illusion" as the
// positive class. Otherwise precision/recall/f1 are macro averages.
ClassificationReport classification_metrics(
    const std::vector<std::string>& gt, const std::vector<std::string>& pred,
    const std::vector<std::string>& classes = {"illusion", "non_illusion"});

struct OtsuResult {
  int threshold = 0;  // darker class is value < threshold
  Mask mask;
};

OtsuResult otsu_localize(const Image& image);

struct EvalOptions {
  double threshold = kDefaultThreshold;
  LossConfig loss;
  // Ids to score; every illusion in the manifest when unset.
  std::optional<std::vector<std::string>> ids;
  bool parallel = true;
};

struct EvalRow {
  std::string id;
  Family family = Family::sbc;
  MetricsReport metrics;
  double mse = 0;
  double ssim = 0;
  double loss = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  MetricsReport aggregate;  // means over rows
  double mean_mse = 0;
  double mean_ssim = 0;
  double mean_loss = 0;
};

// Reads pred_dir/<id>.png (level / 255) for each id and scores it against
// the manifest mask.
EvalReport evaluate_directory(const std::filesystem::path& pred_dir, const Manifest& manifest,
                              const EvalOptions& options = {});

nlohmann::json to_json(const EvalReport& report);
// Writes <prefix>.csv and <prefix>.json; returns both paths.
std::vector<std::filesystem::path> write_report(const EvalReport& report,
                                                const std::filesystem::path& prefix);

}  // namespace illum
