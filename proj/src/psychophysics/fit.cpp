#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "illum/error.hpp"
#include "illum/psychophysics.hpp"

namespace illum {

using nlohmann::json;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_phi(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

// log Phi(z), with the asymptotic series where erfc underflows.
double log_ndtr(double z) {
  if (z > -30.0) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
  const double z2 = z * z;
  return log_phi(z) - std::log(-z) + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double log_logistic(double z) {
  return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double log_cdf(PsychometricFamily family, double z) {
  return family == PsychometricFamily::cumulative_gaussian ? log_ndtr(z) : log_logistic(z);
}

// phi(z) / Phi(z)
double mills(double z) { return std::exp(log_phi(z) - log_ndtr(z)); }

struct Derivs {
  double g = 0;  // d ll / dz
  double h = 0;  // d2 ll / dz2
};

Derivs derivs(PsychometricFamily family, double z, double n, double k) {
  if (family == PsychometricFamily::cumulative_gaussian) {
    const double lp = mills(z);
    const double lm = mills(-z);
    return {k * lp - (n - k) * lm, -k * lp * (z + lp) - (n - k) * lm * (lm - z)};
  }
  const double f = std::exp(log_logistic(z));
  return {k - n * f, -n * f * (1.0 - f)};
}

struct Box {
  double pse_lo, pse_hi, ls_lo, ls_hi;  // log sigma bounds
  bool contains(double pse, double ls) const {
    return pse >= pse_lo && pse <= pse_hi && ls >= ls_lo && ls <= ls_hi;
  }
};

}  // namespace

std::string_view to_string(PsychometricFamily family) {
  return family == PsychometricFamily::cumulative_gaussian ? "cumulative_gaussian" : "logistic";
}

PsychometricFamily psychometric_family_from_string(std::string_view name) {
  if (name == "cumulative_gaussian" || name == "probit") return PsychometricFamily::cumulative_gaussian;
  if (name == "logistic" || name == "logit") return PsychometricFamily::logistic;
  throw Error(ErrorKind::parameter, "unknown psychometric family '" + std::string(name) + "'");
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::ok: return "ok";
    case FitStatus::saturated: return "saturated";
    case FitStatus::flat: return "flat";
  }
  return "?";
}

double log_likelihood(const std::vector<PsychometricPoint>& points, PsychometricFamily family,
                      double pse, double sigma) {
  double ll = 0;
  for (const auto& p : points) {
    const double z = (p.d - pse) / sigma;
    const int k = p.n_standard_brighter;
    const int rest = p.n_trials - k;
    if (k > 0) ll += k * log_cdf(family, z);
    if (rest > 0) ll += rest * log_cdf(family, -z);
  }
  return ll;
}

PsychometricFit fit_psychometric(const std::vector<PsychometricPoint>& input,
                                 PsychometricFamily family) {
  std::vector<PsychometricPoint> points;
  for (const auto& p : input) {
    if (p.n_trials < 0 || p.n_standard_brighter < 0 || p.n_standard_brighter > p.n_trials)
      throw Error(ErrorKind::parameter, "inconsistent counts at d = " + std::to_string(p.d));
    if (p.n_trials > 0) points.push_back(p);
  }
  std::set<int> ds;
  for (const auto& p : points) ds.insert(p.d);
  if (ds.size() < 3)
    throw Error(ErrorKind::unfittable, "need at least 3 distinct standard levels with responses, got " +
                                           std::to_string(ds.size()));

  int spacing = std::numeric_limits<int>::max();
  for (auto it = std::next(ds.begin()); it != ds.end(); ++it)
    spacing = std::min(spacing, *it - *std::prev(it));
  const double dmin = *ds.begin();
  const double dmax = *ds.rbegin();
  const Box box{dmin - spacing, dmax + spacing, std::log(0.01 * spacing),
                std::log(10.0 * (dmax - dmin))};

  PsychometricFit fit;
  fit.family = family;
  fit.pse_min = box.pse_lo;
  fit.pse_max = box.pse_hi;
  fit.sigma_min = std::exp(box.ls_lo);
  fit.sigma_max = std::exp(box.ls_hi);
  long total = 0, yes = 0;
  for (const auto& p : points) {
    total += p.n_trials;
    yes += p.n_standard_brighter;
  }
  fit.n_trials = static_cast<int>(total);

  const auto ll_at = [&](double pse, double ls) {
    return log_likelihood(points, family, pse, std::exp(ls));
  };

  if (yes == 0 || yes == total) {
    // Every response the same: the curve sits beyond the tested range.
    fit.status = FitStatus::saturated;
    fit.pse = yes == 0 ? box.pse_hi : box.pse_lo;
    fit.slope_sigma = fit.sigma_min;
    fit.log_likelihood = ll_at(fit.pse, box.ls_lo);
    fit.warnings.push_back(std::string("all responses were '") +
                           (yes == 0 ? "comparator_brighter" : "standard_brighter") +
                           "'; pse is only bounded by the tested range");
    return fit;
  }
  const bool flat = std::all_of(points.begin(), points.end(), [&](const PsychometricPoint& p) {
    return static_cast<long>(p.n_standard_brighter) * points[0].n_trials ==
           static_cast<long>(points[0].n_standard_brighter) * p.n_trials;
  });
  if (flat) {
    fit.status = FitStatus::flat;
    fit.pse = std::numeric_limits<double>::quiet_NaN();
    fit.slope_sigma = std::numeric_limits<double>::infinity();
    const double p = static_cast<double>(yes) / total;
    fit.log_likelihood = yes * std::log(p) + (total - yes) * std::log1p(-p);
    fit.warnings.push_back("response rate does not change with d; pse is undefined");
    return fit;
  }

  // Coarse grid, then shrinking windows around the incumbent.
  double best_pse = 0, best_ls = 0, best = -std::numeric_limits<double>::infinity();
  const auto scan = [&](double p_lo, double p_hi, double s_lo, double s_hi, int n) {
    double bp = best_pse, bs = best_ls;
    for (int i = 0; i < n; ++i) {
      const double pse = p_lo + (p_hi - p_lo) * i / (n - 1);
      for (int j = 0; j < n; ++j) {
        const double ls = s_lo + (s_hi - s_lo) * j / (n - 1);
        const double ll = ll_at(pse, ls);
        if (ll > best) {
          best = ll;
          bp = pse;
          bs = ls;
        }
      }
    }
    best_pse = bp;
    best_ls = bs;
  };
  scan(box.pse_lo, box.pse_hi, box.ls_lo, box.ls_hi, 101);
  double wp = (box.pse_hi - box.pse_lo) / 100.0, ws = (box.ls_hi - box.ls_lo) / 100.0;
  for (int round = 0; round < 40; ++round) {
    scan(std::max(box.pse_lo, best_pse - wp), std::min(box.pse_hi, best_pse + wp),
         std::max(box.ls_lo, best_ls - ws), std::min(box.ls_hi, best_ls + ws), 11);
    wp *= 0.5;
    ws *= 0.5;
  }

  // Newton on (a, b) with z = a + b d; concave for both families.
  double b = std::exp(-best_ls);
  double a = -best_pse * b;
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
    for (const auto& p : points) {
      const auto dv = derivs(family, a + b * p.d, p.n_trials, p.n_standard_brighter);
      ga += dv.g;
      gb += dv.g * p.d;
      haa += dv.h;
      hab += dv.h * p.d;
      hbb += dv.h * p.d * p.d;
    }
    const double det = haa * hbb - hab * hab;
    if (!(det > 0) || !(haa < 0)) break;
    const double da = -(hbb * ga - hab * gb) / det;
    const double db = -(haa * gb - hab * ga) / det;
    bool moved = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      const double na = a + t * da, nb = b + t * db;
      if (!(nb > 0)) continue;
      const double pse = -na / nb, ls = -std::log(nb);
      if (!box.contains(pse, ls)) continue;
      const double ll = ll_at(pse, ls);
      if (ll > best) {
        moved = ll - best > 1e-13 * std::max(1.0, std::abs(best));
        best = ll;
        a = na;
        b = nb;
        break;
      }
    }
    if (!moved) break;
  }

  fit.status = FitStatus::ok;
  fit.pse = -a / b;
  fit.slope_sigma = 1.0 / b;
  fit.log_likelihood = best;
  if (std::abs(std::log(fit.slope_sigma) - box.ls_lo) < 1e-6)
    fit.warnings.push_back("responses are perfectly separated; slope is at its bound");
  if (std::abs(std::log(fit.slope_sigma) - box.ls_hi) < 1e-6)
    fit.warnings.push_back("slope is at its upper bound");
  return fit;
}

IllusoryReduction illusory_reduction(const PsychometricFit& fit, int comparator_intensity) {
  if (fit.status != FitStatus::ok)
    throw Error(ErrorKind::unfittable,
                "psychometric fit is " + std::string(to_string(fit.status)) + "; no pse");
  if (comparator_intensity < 0 || comparator_intensity > 255)
    throw Error(ErrorKind::parameter, "comparator intensity must be in [0, 255]");
  IllusoryReduction r;
  r.comparator_intensity = comparator_intensity;
  r.reduction = -fit.pse;
  r.perceived_intensity = comparator_intensity - r.reduction;
  if (r.perceived_intensity < 0 || r.perceived_intensity > 255)
    throw Error(ErrorKind::unfittable, "perceived intensity " + std::to_string(r.perceived_intensity) +
                                           " falls outside [0, 255]");
  return r;
}

json to_json(const PsychometricFit& f) {
  json j{{"family", std::string(to_string(f.family))},
         {"status", std::string(to_string(f.status))},
         {"n_trials", f.n_trials},
         {"log_likelihood", f.log_likelihood},
         {"warnings", f.warnings}};
  j["pse"] = std::isfinite(f.pse) ? json(f.pse) : json(nullptr);
  j["slope_sigma"] = std::isfinite(f.slope_sigma) ? json(f.slope_sigma) : json(nullptr);
  return j;
}

json to_json(const IllusoryReduction& r) {
  return {{"comparator_intensity", r.comparator_intensity},
          {"reduction", r.reduction},
          {"perceived_intensity", r.perceived_intensity}};
}

}  // namespace illum
