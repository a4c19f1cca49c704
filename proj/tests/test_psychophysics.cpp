#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "illum/error.hpp"
#include "illum/psychophysics.hpp"

using namespace illum;
using nlohmann::json;

namespace {

std::vector<TrialSpec> sbc_schedule(int n, std::uint64_t seed) {
  return schedule_session(comparator_pool(Family::sbc, seed, 150, 50), n, seed);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::io;
}

// Points on P = Phi((d - pse) / sigma) at the standard levels, counts rounded.
std::vector<PsychometricPoint> exact_points(double pse, double sigma, int n) {
  std::vector<PsychometricPoint> out;
  for (int level : kStandardLevels) {
    const int d = level - 150;
    out.push_back({d, n, static_cast<int>(std::lround(n * normal_cdf((d - pse) / sigma)))});
  }
  return out;
}

}  // namespace

TEST_SUITE("psychophysics") {

TEST_CASE("schedule balances sides and is seed deterministic") {
  for (int n : {11, 22, 23, 500}) {
    const auto s = sbc_schedule(n, 5);
    const auto left = std::count_if(s.begin(), s.end(),
                                    [](const TrialSpec& t) { return t.comparator_side == Side::left; });
    CHECK(std::abs(2 * left - n) <= 1);
  }
  const auto s22 = sbc_schedule(22, 9);
  CHECK(std::count_if(s22.begin(), s22.end(),
                      [](const TrialSpec& t) { return t.comparator_side == Side::left; }) == 11);

  const auto a = sbc_schedule(60, 3);
  const auto b = sbc_schedule(60, 3);
  const auto c = sbc_schedule(60, 4);
  bool same = true, differs = false;
  for (int i = 0; i < 60; ++i) {
    same = same && to_json(a[i]) == to_json(b[i]);
    differs = differs || to_json(a[i]) != to_json(c[i]);
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("standard strip is a fresh bijection each trial") {
  const auto s = sbc_schedule(200, 1);
  std::set<std::array<int, 11>> distinct;
  for (const auto& t : s) {
    auto p = t.standard.permutation;
    std::sort(p.begin(), p.end());
    std::array<int, 11> id{};
    std::iota(id.begin(), id.end(), 0);
    CHECK(p == id);
    CHECK(t.standard.comparison_segment_index >= 0);
    CHECK(t.standard.comparison_segment_index < 11);
    CHECK(t.fixation_ms == 1000);
    CHECK(t.exposure_ms == 3000);
    CHECK(t.comparator_intensity == 150);
    distinct.insert(t.standard.permutation);
  }
  CHECK(distinct.size() > 190);
}

TEST_CASE("comparison levels occur within binomial 99% bounds") {
  const int n = 1100;
  const auto s = sbc_schedule(n, 21);
  std::map<int, int> freq;
  for (const auto& t : s) ++freq[t.standard.comparison_level()];
  const double p = 1.0 / 11, mean = n * p, sd = std::sqrt(n * p * (1 - p));
  REQUIRE(freq.size() == 11);
  for (int level : kStandardLevels) {
    CAPTURE(level);
    CHECK(std::abs(freq[level] - mean) <= 2.576 * sd);
  }
}

TEST_CASE("schedule preconditions") {
  const auto pool = comparator_pool(Family::sbc, 1, 150, 5);
  CHECK(kind_of([&] { schedule_session(pool, 10, 1); }) == ErrorKind::precondition);
  CHECK(kind_of([&] { schedule_session({}, 20, 1); }) == ErrorKind::precondition);
  CHECK(kind_of([&] { schedule_session({to_stimulus(HermannSpec{})}, 20, 1); }) ==
        ErrorKind::protocol);
  CHECK(kind_of([] { comparator_pool(Family::hermann, 1); }) == ErrorKind::protocol);
  CHECK(kind_of([] { comparator_pool(Family::mach_band, 1); }) == ErrorKind::protocol);
  CHECK(kind_of([] { comparator_pool(Family::non_illusion, 1); }) == ErrorKind::protocol);
  CHECK(kind_of([] { comparator_pool(Family::sbc, 1, 151); }) == ErrorKind::precondition);
}

TEST_CASE("comparator pools hold targets at the requested intensity") {
  for (Family f : kTableFamilies) {
    CAPTURE(to_string(f));
    const auto pool = comparator_pool(f, 7, 150, 30);
    CHECK(pool.size() == 30);
    std::set<std::string> ids;
    for (const auto& spec : pool) {
      CHECK(family_of(spec) == f);
      CHECK(target_intensity(spec) == 150);
      ids.insert(stimulus_id(spec));
    }
    CHECK(ids.size() == pool.size());
  }
  CHECK(comparator_pool(Family::white, 1, 150, 100000).size() < 100000);
}

TEST_CASE("keys map to responses") {
  CHECK(response_for(Key::one) == Response::comparator_brighter);
  CHECK(response_for(Key::two) == Response::standard_brighter);
}

TEST_CASE("aggregate") {
  CHECK(aggregate({{0, Response::standard_brighter, 500, 23}}) ==
        std::vector<PsychometricPoint>{{23, 1, 1}});
  const auto pts = aggregate({{0, Response::standard_brighter, 1, 23},
                              {1, Response::comparator_brighter, 1, -22},
                              {2, Response::standard_brighter, 1, 23},
                              {3, Response::comparator_brighter, 1, 23}});
  CHECK(pts == std::vector<PsychometricPoint>{{-22, 1, 0}, {23, 3, 2}});

  // Simulated observer, 200 trials per level: proportions rise with d.
  const auto s = sbc_schedule(2200, 33);
  const auto points = aggregate(simulate_observer(30, 10, s, 33));
  REQUIRE(points.size() == 11);
  int total = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += points[i].n_trials;
    if (i > 0)
      CHECK(points[i].n_standard_brighter * points[i - 1].n_trials >=
            points[i - 1].n_standard_brighter * points[i].n_trials);
  }
  CHECK(total == 2200);
}

TEST_CASE("fit recovers a forward-generated cumulative Gaussian") {
  const auto fit = fit_psychometric(exact_points(-35, 12, 100000));
  CHECK(fit.status == FitStatus::ok);
  CHECK(std::abs(fit.pse + 35) <= 0.5);
  CHECK(std::abs(fit.slope_sigma - 12) <= 1);
  CHECK(fit.n_trials == 1100000);
  CHECK(fit.pse_min == -137 - 22);
  CHECK(fit.pse_max == 92 + 22);
}

TEST_CASE("fit beats every point of a coarse grid, both families") {
  const auto s = sbc_schedule(400, 2);
  const auto points = aggregate(simulate_observer(20, 15, s, 2));
  for (auto family : {PsychometricFamily::cumulative_gaussian, PsychometricFamily::logistic}) {
    const auto fit = fit_psychometric(points, family);
    REQUIRE(fit.status == FitStatus::ok);
    CHECK(fit.log_likelihood == doctest::Approx(log_likelihood(points, family, fit.pse, fit.slope_sigma)));
    double best = -INFINITY;
    for (int i = 0; i < 60; ++i)
      for (int j = 0; j < 60; ++j) {
        const double pse = fit.pse_min + (fit.pse_max - fit.pse_min) * i / 59.0;
        const double sigma = 0.5 + 60.0 * j / 59.0;
        best = std::max(best, log_likelihood(points, family, pse, sigma));
      }
    CHECK(fit.log_likelihood >= best - 1e-6);
    CHECK(fit.slope_sigma > 0);
  }
}

TEST_CASE("degenerate fits are flagged") {
  std::vector<PsychometricPoint> none{{-20, 10, 0}, {0, 10, 0}, {20, 10, 0}};
  auto fit = fit_psychometric(none);
  CHECK(fit.status == FitStatus::saturated);
  CHECK(fit.pse == fit.pse_max);
  CHECK_FALSE(fit.warnings.empty());
  CHECK(kind_of([&] { illusory_reduction(fit); }) == ErrorKind::unfittable);

  std::vector<PsychometricPoint> all{{-20, 10, 10}, {0, 10, 10}, {20, 10, 10}};
  CHECK(fit_psychometric(all).pse == fit_psychometric(all).pse_min);

  std::vector<PsychometricPoint> balanced{{-20, 10, 5}, {0, 4, 2}, {20, 10, 5}};
  fit = fit_psychometric(balanced);
  CHECK(fit.status == FitStatus::flat);
  CHECK(std::isnan(fit.pse));
  CHECK_FALSE(fit.warnings.empty());
  CHECK(to_json(fit)["pse"].is_null());
  CHECK(kind_of([&] { illusory_reduction(fit); }) == ErrorKind::unfittable);

  CHECK(kind_of([] { fit_psychometric({{0, 5, 2}, {10, 5, 3}}); }) == ErrorKind::unfittable);
  CHECK(kind_of([] { fit_psychometric({{0, 5, 2}, {10, 5, 3}, {20, 0, 0}}); }) ==
        ErrorKind::unfittable);
  CHECK(kind_of([] { fit_psychometric({{0, 5, 6}, {10, 5, 3}, {20, 5, 5}}); }) ==
        ErrorKind::parameter);
}

TEST_CASE("illusory reduction sign convention") {
  PsychometricFit fit;
  fit.pse = -32.95;
  auto r = illusory_reduction(fit, 150);
  CHECK(r.reduction == doctest::Approx(32.95));
  CHECK(r.perceived_intensity == doctest::Approx(117.05));
  fit.pse = 0;
  r = illusory_reduction(fit, 150);
  CHECK(r.reduction == 0);
  CHECK(r.perceived_intensity == 150);
  fit.pse = 200;
  CHECK(kind_of([&] { illusory_reduction(fit, 150); }) == ErrorKind::unfittable);
  CHECK(kind_of([&] { illusory_reduction(PsychometricFit{}, 300); }) == ErrorKind::parameter);
}

TEST_CASE("simulated observer") {
  const auto s = sbc_schedule(1000, 1);
  const auto a = simulate_observer(49.22, 10, s, 1);
  CHECK(a == simulate_observer(49.22, 10, s, 1));
  CHECK(a != simulate_observer(49.22, 10, s, 2));
  for (const auto& r : a) {
    CHECK(r.reaction_ms >= 450);
    CHECK(r.reaction_ms <= 850);
  }
  const auto red = illusory_reduction(fit_psychometric(aggregate(a))).reduction;
  CHECK(red > 0);
  CHECK(std::abs(red - 49.22) <= 2.0);

  // Noiseless: a step between the levels bracketing d = -30.
  for (const auto& r : simulate_observer(30, 0, s, 1))
    CHECK((r.response == Response::standard_brighter) == (r.d > -30));
  const auto step = fit_psychometric(aggregate(simulate_observer(30, 0, s, 1)));
  CHECK(step.pse > -45);
  CHECK(step.pse < -22);
  CHECK_FALSE(step.warnings.empty());

  // Pure noise: about half at every level.
  for (const auto& p : aggregate(simulate_observer(0, 1e7, s, 1)))
    CHECK(std::abs(static_cast<double>(p.n_standard_brighter) / p.n_trials - 0.5) < 0.15);

  CHECK(kind_of([&] { simulate_observer(10, -1, s, 1); }) == ErrorKind::parameter);
}

TEST_CASE("trial and result JSON round trip") {
  const auto s = sbc_schedule(30, 8);
  for (const auto& t : s) {
    const auto back = trial_from_json(to_json(t));
    CHECK(to_json(back) == to_json(t));
    CHECK(back.d() == t.d());
  }
  const TrialResult r{4, Response::comparator_brighter, 612.5, -22};
  CHECK(trial_result_from_json(to_json(r)) == r);
  CHECK(to_json(r)["response"] == "comparator_brighter");
}

TEST_CASE("reduction table") {
  const auto s = sbc_schedule(1000, 4);
  SessionData one{"s1", Family::white, 150, simulate_observer(40, 10, s, 4)};
  auto table = reduction_table({one});
  REQUIRE(table.subjects == std::vector<std::string>{"s1"});
  CHECK_FALSE(table.cells["s1"][0]);
  REQUIRE(table.cells["s1"][1]);
  CHECK(table.averages[1] == table.cells["s1"][1]);
  CHECK_FALSE(table.averages[0]);

  SessionData flat{"s2", Family::sbc, 150, {}};
  for (int i = 0; i < 3; ++i) flat.results.push_back({i, Response::standard_brighter, 1, -22 + 23 * i});
  SessionData grid{"s2", Family::grid, 150, simulate_observer(20, 10, s, 5)};
  table = reduction_table({one, flat, grid});
  CHECK(table.subjects == std::vector<std::string>{"s1", "s2"});
  CHECK_FALSE(table.cells["s2"][0]);  // saturated, left empty
  REQUIRE(table.cells["s2"][3]);

  const auto csv = to_csv(table);
  CHECK(csv.rfind("subject,sbc,white,grating,grid\n", 0) == 0);
  CHECK(csv.find("\naverage,") != std::string::npos);
  CHECK(csv.find("\ns2,,,,") != std::string::npos);
  const auto j = to_json(table);
  CHECK(j["columns"] == json({"sbc", "white", "grating", "grid"}));

  CHECK(kind_of([&] { reduction_table({{"x", Family::hermann, 150, one.results}}); }) ==
        ErrorKind::parameter);
}

TEST_CASE("string names") {
  CHECK(psychometric_family_from_string("logistic") == PsychometricFamily::logistic);
  CHECK(psychometric_family_from_string(to_string(PsychometricFamily::cumulative_gaussian)) ==
        PsychometricFamily::cumulative_gaussian);
  CHECK(kind_of([] { psychometric_family_from_string("weibull"); }) == ErrorKind::parameter);
  CHECK(to_string(FitStatus::flat) == "flat");
}

}  // TEST_SUITE
