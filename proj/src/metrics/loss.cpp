#include <cmath>
#include <numeric>

#include "illum/error.hpp"
#include "illum/metrics.hpp"

namespace illum {

namespace {

void require_same_shape(const ResponseMap& a, const ResponseMap& b) {
  if (!a.same_shape(b) || a.empty())
    throw Error(ErrorKind::dimension,
                "response maps differ in shape: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
}

void require_unit_range(const ResponseMap& r, const char* what) {
  for (double v : r.pixels())
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorKind::parameter, std::string(what) + " values must be finite and in [0, 1]");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(size));
  const int r = size / 2;
  for (int i = 0; i < size; ++i) g[i] = std::exp(-((i - r) * (i - r)) / (2.0 * sigma * sigma));
  const double sum = std::accumulate(g.begin(), g.end(), 0.0);
  for (auto& v : g) v /= sum;
  return g;
}

// Separable Gaussian moments over the valid region. Each output row is
// independent, and the final mean is summed in row order, so the parallel
// and serial paths produce identical bits.
double ssim_impl(const ResponseMap& a, const ResponseMap& b, const LossConfig& cfg, bool parallel) {
  validate(cfg);
  require_same_shape(a, b);
  const int k = cfg.ssim_window;
  const int w = a.width();
  const int h = a.height();
  if (w < k || h < k)
    throw Error(ErrorKind::dimension, "image " + std::to_string(w) + "x" + std::to_string(h) +
                                          " is smaller than the " + std::to_string(k) +
                                          "-pixel SSIM window");
  const auto g = gaussian_kernel(k, cfg.ssim_sigma);
  const double c1 = cfg.resolved_c1();
  const double c2 = cfg.resolved_c2();
  const int ow = w - k + 1;
  const int oh = h - k + 1;
  const auto plane = static_cast<std::size_t>(ow) * static_cast<std::size_t>(h);

  // Horizontal pass: five moment planes, each h rows by ow columns.
  std::vector<double> ha(plane), hb(plane), haa(plane), hbb(plane), hab(plane);
#pragma omp parallel for if (parallel) schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto ra = a.row(y);
    const auto rb = b.row(y);
    for (int x = 0; x < ow; ++x) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < k; ++i) {
        const double va = ra[x + i];
        const double vb = rb[x + i];
        sa += g[i] * va;
        sb += g[i] * vb;
        saa += g[i] * va * va;
        sbb += g[i] * vb * vb;
        sab += g[i] * va * vb;
      }
      const auto idx = static_cast<std::size_t>(y) * ow + x;
      ha[idx] = sa;
      hb[idx] = sb;
      haa[idx] = saa;
      hbb[idx] = sbb;
      hab[idx] = sab;
    }
  }

  std::vector<double> row_sums(static_cast<std::size_t>(oh));
#pragma omp parallel for if (parallel) schedule(static)
  for (int y = 0; y < oh; ++y) {
    double total = 0;
    for (int x = 0; x < ow; ++x) {
      double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
      for (int j = 0; j < k; ++j) {
        const auto idx = static_cast<std::size_t>(y + j) * ow + x;
        ma += g[j] * ha[idx];
        mb += g[j] * hb[idx];
        maa += g[j] * haa[idx];
        mbb += g[j] * hbb[idx];
        mab += g[j] * hab[idx];
      }
      const double va = maa - ma * ma;
      const double vb = mbb - mb * mb;
      const double cov = mab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    row_sums[y] = total;
  }
  double sum = 0;
  for (double s : row_sums) sum += s;
  return sum / (static_cast<double>(ow) * oh);
}

}  // namespace

void validate(const LossConfig& cfg) {
  if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0))
    throw Error(ErrorKind::parameter, "alpha and beta must be >= 0");
  if (std::abs(cfg.alpha + cfg.beta - 1.0) > 1e-9)
    throw Error(ErrorKind::parameter, "alpha + beta must equal 1");
  if (cfg.ssim_window < 1 || cfg.ssim_window % 2 == 0)
    throw Error(ErrorKind::parameter, "ssim_window must be odd and >= 1");
  if (!(cfg.ssim_sigma > 0.0) || !std::isfinite(cfg.ssim_sigma))
    throw Error(ErrorKind::parameter, "ssim_sigma must be > 0");
  if (!(cfg.dynamic_range > 0.0) || !std::isfinite(cfg.dynamic_range))
    throw Error(ErrorKind::parameter, "dynamic_range must be > 0");
  if (cfg.resolved_c1() < 0.0 || cfg.resolved_c2() < 0.0)
    throw Error(ErrorKind::parameter, "c1 and c2 must be >= 0");
}

double mse(const ResponseMap& a, const ResponseMap& b) {
  require_same_shape(a, b);
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double sum = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pa.size());
}

double ssim(const ResponseMap& a, const ResponseMap& b, const LossConfig& cfg) {
  return ssim_impl(a, b, cfg, true);
}

double ssim_serial(const ResponseMap& a, const ResponseMap& b, const LossConfig& cfg) {
  return ssim_impl(a, b, cfg, false);
}

double combined_loss(const ResponseMap& pred, const ResponseMap& target, const LossConfig& cfg) {
  validate(cfg);
  require_unit_range(pred, "prediction");
  require_unit_range(target, "target");
  return cfg.alpha * mse(pred, target) + cfg.beta * (1.0 - ssim(pred, target, cfg));
}

Mask binarize(const ResponseMap& response, double threshold) {
  Mask out(response.width(), response.height());
  const auto src = response.pixels();
  const auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= threshold ? 1 : 0;
  return out;
}

}  // namespace illum
