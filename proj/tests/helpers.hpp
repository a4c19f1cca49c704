#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "illum/image.hpp"
#include "illum/stimulus.hpp"

namespace testing_support {

// Unique scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int n = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("illum_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Set of pixel values under a mask.
inline std::set<int> levels_under(const illum::Image& img, const illum::Mask& mask) {
  std::set<int> out;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (mask.at(x, y)) out.insert(img.at(x, y));
  return out;
}

// Target and reference hold exactly one gray level, the same one, equal to
// the declared target intensity.
inline bool equal_intensity(const illum::StimulusSpec& spec, const illum::Rendering& r) {
  const auto t = levels_under(r.image, r.mask);
  const auto ref = levels_under(r.image, r.reference);
  const auto declared = illum::target_intensity(spec);
  return declared && t.size() == 1 && ref.size() == 1 && *t.begin() == *ref.begin() &&
         *t.begin() == *declared;
}

// Textbook SSIM: explicit 2-D Gaussian window, per-pixel double loops.
inline double naive_ssim(const illum::ResponseMap& a, const illum::ResponseMap& b, int win,
                         double sigma, double c1, double c2) {
  std::vector<double> w(static_cast<std::size_t>(win * win));
  double total = 0;
  const int r = win / 2;
  for (int j = 0; j < win; ++j)
    for (int i = 0; i < win; ++i) {
      const double v = std::exp(-((i - r) * (i - r) + (j - r) * (j - r)) / (2 * sigma * sigma));
      w[j * win + i] = v;
      total += v;
    }
  for (auto& v : w) v /= total;
  double sum = 0;
  int count = 0;
  for (int y = 0; y + win <= a.height(); ++y)
    for (int x = 0; x + win <= a.width(); ++x) {
      double ma = 0, mb = 0;
      for (int j = 0; j < win; ++j)
        for (int i = 0; i < win; ++i) {
          ma += w[j * win + i] * a.at(x + i, y + j);
          mb += w[j * win + i] * b.at(x + i, y + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (int j = 0; j < win; ++j)
        for (int i = 0; i < win; ++i) {
          const double da = a.at(x + i, y + j) - ma;
          const double db = b.at(x + i, y + j) - mb;
          va += w[j * win + i] * da * da;
          vb += w[j * win + i] * db * db;
          cov += w[j * win + i] * da * db;
        }
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return sum / count;
}

struct SetMetrics {
  double accuracy, precision, recall, f1, miou;
};

// Metrics from explicit pixel sets, with the same empty-set conventions.
inline SetMetrics set_metrics(const illum::Mask& pred, const illum::Mask& gt) {
  std::set<int> P, G, all;
  for (int i = 0; i < static_cast<int>(pred.size()); ++i) {
    all.insert(i);
    if (pred.pixels()[i]) P.insert(i);
    if (gt.pixels()[i]) G.insert(i);
  }
  std::set<int> inter, uni, notP, notG, inter_bg, uni_bg;
  for (int i : all) {
    const bool p = P.count(i), g = G.count(i);
    if (p && g) inter.insert(i);
    if (p || g) uni.insert(i);
    if (!p && !g) inter_bg.insert(i);
    if (!p || !g) uni_bg.insert(i);
  }
  const bool both_empty = P.empty() && G.empty();
  const auto ratio = [&](double n, double d) { return d == 0 ? (both_empty ? 1.0 : 0.0) : n / d; };
  SetMetrics m{};
  m.accuracy = static_cast<double>(inter.size() + inter_bg.size()) / all.size();
  m.precision = ratio(inter.size(), P.size());
  m.recall = ratio(inter.size(), G.size());
  m.f1 = ratio(2.0 * inter.size(), P.size() + G.size());
  const double iou_fg = uni.empty() ? 1.0 : static_cast<double>(inter.size()) / uni.size();
  const double iou_bg = uni_bg.empty() ? 1.0 : static_cast<double>(inter_bg.size()) / uni_bg.size();
  m.miou = (iou_fg + iou_bg) / 2;
  return m;
}

// Otsu by definition: maximise between-class variance over every split,
// class 0 = levels below k.
inline int naive_otsu(const illum::Image& img) {
  double best = -1;
  int best_k = -1;
  const double n = static_cast<double>(img.size());
  for (int k = 1; k <= 255; ++k) {
    double n0 = 0, s0 = 0, s1 = 0;
    for (auto v : img.pixels()) {
      if (v < k) {
        n0 += 1;
        s0 += v;
      } else {
        s1 += v;
      }
    }
    const double n1 = n - n0;
    if (n0 == 0 || n1 == 0) continue;
    const double m0 = s0 / n0, m1 = s1 / n1;
    const double between = (n0 / n) * (n1 / n) * (m0 - m1) * (m0 - m1);
    if (between > best * (1 + 1e-12)) {
      best = between;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace testing_support
