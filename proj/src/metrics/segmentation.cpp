#include <array>
#include <algorithm>

#include "illum/error.hpp"
#include "illum/metrics.hpp"

namespace illum {

namespace {

double ratio(std::size_t num, std::size_t den, bool vacuous) {
  if (den == 0) return vacuous ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

Confusion confusion(const Mask& pred, const Mask& gt) {
  if (!pred.same_shape(gt))
    throw Error(ErrorKind::dimension, "prediction and ground-truth masks differ in shape");
  Confusion c;
  const auto p = pred.pixels();
  const auto g = gt.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pp = p[i] != 0;
    const bool gg = g[i] != 0;
    if (pp && gg) ++c.tp;
    else if (pp) ++c.fp;
    else if (gg) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricsReport report_from_confusion(const Confusion& c) {
  const bool both_empty = c.tp + c.fp + c.fn == 0;
  MetricsReport r;
  const std::size_t total = c.tp + c.fp + c.fn + c.tn;
  r.pixel_accuracy = ratio(c.tp + c.tn, total, true);
  r.precision = ratio(c.tp, c.tp + c.fp, both_empty);
  r.recall = ratio(c.tp, c.tp + c.fn, both_empty);
  r.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, both_empty);
  const double iou_fg = ratio(c.tp, c.tp + c.fp + c.fn, true);
  const double iou_bg = ratio(c.tn, c.tn + c.fp + c.fn, true);
  r.miou = (iou_fg + iou_bg) / 2;
  return r;
}

MetricsReport segmentation_metrics(const Mask& pred, const Mask& gt) {
  return report_from_confusion(confusion(pred, gt));
}

ClassificationReport classification_metrics(const std::vector<std::string>& gt,
                                            const std::vector<std::string>& pred,
                                            const std::vector<std::string>& classes) {
  if (gt.size() != pred.size())
    throw Error(ErrorKind::dimension, "label lists differ in length");
  if (classes.size() < 2) throw Error(ErrorKind::parameter, "need at least two classes");
  const auto index_of = [&](const std::string& label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw Error(ErrorKind::parameter, "unknown label '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
  };

  ClassificationReport rep;
  rep.classes = classes;
  const std::size_t n = classes.size();
  rep.confusion.assign(n, std::vector<std::size_t>(n, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto g = index_of(gt[i]);
    const auto p = index_of(pred[i]);
    ++rep.confusion[g][p];
    correct += g == p;
  }
  rep.accuracy = ratio(correct, gt.size(), true);

  const auto per_class = [&](std::size_t c) {
    std::size_t tp = rep.confusion[c][c], pred_pos = 0, gt_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
      pred_pos += rep.confusion[k][c];
      gt_pos += rep.confusion[c][k];
    }
    const bool absent = pred_pos == 0 && gt_pos == 0;
    const double p = ratio(tp, pred_pos, absent);
    const double r = ratio(tp, gt_pos, absent);
    return std::array<double, 3>{p, r, absent ? 1.0 : harmonic(p, r)};
  };

  const auto positive = std::find(classes.begin(), classes.end(), "illusion");
  if (n == 2 && positive != classes.end()) {
    const auto [p, r, f] = per_class(static_cast<std::size_t>(positive - classes.begin()));
    rep.precision = p;
    rep.recall = r;
    rep.f1 = f;
  } else {
    for (std::size_t c = 0; c < n; ++c) {
      const auto [p, r, f] = per_class(c);
      rep.precision += p / n;
      rep.recall += r / n;
      rep.f1 += f / n;
    }
  }
  return rep;
}

}  // namespace illum
