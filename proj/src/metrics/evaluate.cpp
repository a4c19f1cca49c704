#include <exception>
#include <sstream>
#include <unordered_map>

#include "illum/error.hpp"
#include "illum/metrics.hpp"
#include "illum/png_io.hpp"

namespace illum {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

EvalRow score(const fs::path& pred_dir, const Manifest& manifest, const ManifestEntry& entry,
              const EvalOptions& options) {
  const auto pred_path = pred_dir / (entry.id + ".png");
  if (!fs::exists(pred_path))
    throw Error(ErrorKind::not_found, entry.id + ": missing prediction " + pred_path.string());
  const Image pred_image = read_png(pred_path);
  const Mask gt = read_mask_png(manifest.root / entry.mask_path);
  if (!pred_image.same_shape(gt))
    throw Error(ErrorKind::dimension,
                entry.id + ": prediction is " + std::to_string(pred_image.width()) + "x" +
                    std::to_string(pred_image.height()) + ", ground truth is " +
                    std::to_string(gt.width()) + "x" + std::to_string(gt.height()));

  const ResponseMap response = to_response(pred_image);
  const ResponseMap target = to_response(gt);
  EvalRow row;
  row.id = entry.id;
  row.family = entry.family;
  row.metrics = segmentation_metrics(binarize(response, options.threshold), gt);
  row.mse = mse(response, target);
  row.ssim = options.parallel ? ssim(response, target, options.loss)
                              : ssim_serial(response, target, options.loss);
  row.loss = options.loss.alpha * row.mse + options.loss.beta * (1.0 - row.ssim);
  return row;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace

EvalReport evaluate_directory(const fs::path& pred_dir, const Manifest& manifest,
                              const EvalOptions& options) {
  validate(options.loss);
  std::vector<const ManifestEntry*> entries;
  if (options.ids) {
    std::unordered_map<std::string, const ManifestEntry*> index;
    for (const auto& e : manifest.entries) index.emplace(e.id, &e);
    for (const auto& id : *options.ids) {
      const auto it = index.find(id);
      if (it == index.end()) throw Error(ErrorKind::not_found, "id " + id + " is not in the manifest");
      entries.push_back(it->second);
    }
  } else {
    for (const auto& e : manifest.entries)
      if (e.label == Label::illusion) entries.push_back(&e);
  }
  if (entries.empty()) throw Error(ErrorKind::precondition, "nothing to evaluate");

  EvalReport report;
  report.rows.resize(entries.size());
  std::vector<std::exception_ptr> errors(entries.size());
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
#pragma omp parallel for if (options.parallel) schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      report.rows[i] = score(pred_dir, manifest, *entries[i], options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Ordered reduction: the aggregate does not depend on thread scheduling.
  auto& agg = report.aggregate;
  for (const auto& r : report.rows) {
    agg.pixel_accuracy += r.metrics.pixel_accuracy;
    agg.precision += r.metrics.precision;
    agg.recall += r.metrics.recall;
    agg.f1 += r.metrics.f1;
    agg.miou += r.metrics.miou;
    report.mean_mse += r.mse;
    report.mean_ssim += r.ssim;
    report.mean_loss += r.loss;
  }
  const double count = static_cast<double>(report.rows.size());
  for (double* v : {&agg.pixel_accuracy, &agg.precision, &agg.recall, &agg.f1, &agg.miou,
                    &report.mean_mse, &report.mean_ssim, &report.mean_loss})
    *v /= count;
  return report;
}

json to_json(const EvalReport& report) {
  const auto metrics = [](const MetricsReport& m) {
    return json{{"pixel_accuracy", m.pixel_accuracy}, {"precision", m.precision},
                {"recall", m.recall},                 {"f1", m.f1},
                {"miou", m.miou}};
  };
  json items = json::array();
  for (const auto& r : report.rows) {
    json j = metrics(r.metrics);
    j["id"] = r.id;
    j["family"] = std::string(to_string(r.family));
    j["mse"] = r.mse;
    j["ssim"] = r.ssim;
    j["loss"] = r.loss;
    items.push_back(std::move(j));
  }
  json agg = metrics(report.aggregate);
  agg["mse"] = report.mean_mse;
  agg["ssim"] = report.mean_ssim;
  agg["loss"] = report.mean_loss;
  agg["count"] = report.rows.size();
  return {{"aggregate", agg}, {"items", items}};
}

std::vector<fs::path> write_report(const EvalReport& report, const fs::path& prefix) {
  std::ostringstream csv;
  csv << "id,family,pixel_accuracy,precision,recall,f1,miou,mse,ssim,loss\n";
  const auto line = [&](const std::string& id, const std::string& family, const MetricsReport& m,
                        double mse_v, double ssim_v, double loss_v) {
    csv << id << ',' << family << ',' << fmt(m.pixel_accuracy) << ',' << fmt(m.precision) << ','
        << fmt(m.recall) << ',' << fmt(m.f1) << ',' << fmt(m.miou) << ',' << fmt(mse_v) << ','
        << fmt(ssim_v) << ',' << fmt(loss_v) << '\n';
  };
  for (const auto& r : report.rows)
    line(r.id, std::string(to_string(r.family)), r.metrics, r.mse, r.ssim, r.loss);
  line("aggregate", "", report.aggregate, report.mean_mse, report.mean_ssim, report.mean_loss);

  auto csv_path = prefix;
  csv_path += ".csv";
  auto json_path = prefix;
  json_path += ".json";
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  write_file_atomic(csv_path, csv.str());
  write_file_atomic(json_path, to_json(report).dump(2) + "\n");
  return {csv_path, json_path};
}

}  // namespace illum
