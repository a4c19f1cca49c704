#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "illum/stimulus.hpp"

namespace illum {

// Sign convention, used everywhere below: d = standard_level - comparator_physical.
// P(standard judged brighter | d) = F((d - pse) / sigma); reduction = -pse.

inline constexpr std::array<int, 11> kStandardLevels{13, 36, 59, 82, 105, 128,
                                                     150, 173, 196, 219, 242};

struct StandardTarget {
  // Segment i (top to bottom) shows kStandardLevels[permutation[i]].
  std::array<int, 11> permutation{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int comparison_segment_index = 0;

  int segment_level(int segment) const { return kStandardLevels[permutation[segment]]; }
  int comparison_level() const { return segment_level(comparison_segment_index); }
  friend bool operator==(const StandardTarget&, const StandardTarget&) = default;
};

struct TrialSpec {
  int trial_id = 0;
  StimulusSpec comparator;
  int comparator_intensity = 150;
  StandardTarget standard;
  Side comparator_side = Side::left;
  int fixation_ms = 1000;
  int exposure_ms = 3000;

  int d() const { return standard.comparison_level() - comparator_intensity; }
};

enum class Response { comparator_brighter, standard_brighter };
// ONE: the comparator looks brighter. TWO: otherwise.
enum class Key { one, two };

Response response_for(Key key);

struct TrialResult {
  int trial_id = 0;
  Response response = Response::standard_brighter;
  double reaction_ms = 0;
  int d = 0;
  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct ScheduleOptions {
  int fixation_ms = 1000;
  int exposure_ms = 3000;
};

// Throws a protocol error for stimuli that cannot serve as comparators:
// Hermann grids (the blobs are not physically present) and anything without
// a uniform masked target.
void check_comparator(const StimulusSpec& spec);

std::vector<TrialSpec> schedule_session(const std::vector<StimulusSpec>& stimuli, int n_trials,
                                        std::uint64_t seed, const ScheduleOptions& options = {});

// Comparator stimuli of one family whose target sits at `intensity`, chosen
// by seeded key from the default sweep grids.
std::vector<StimulusSpec> comparator_pool(Family family, std::uint64_t seed, int intensity = 150,
                                          std::size_t size = 400);

struct PsychometricPoint {
  int d = 0;
  int n_trials = 0;
  int n_standard_brighter = 0;
  friend bool operator==(const PsychometricPoint&, const PsychometricPoint&) = default;
};

// Sorted by d.
std::vector<PsychometricPoint> aggregate(const std::vector<TrialResult>& results);

enum class PsychometricFamily { cumulative_gaussian, logistic };
enum class FitStatus { ok, saturated, flat };

std::string_view to_string(PsychometricFamily family);
PsychometricFamily psychometric_family_from_string(std::string_view name);
std::string_view to_string(FitStatus status);

struct PsychometricFit {
  PsychometricFamily family = PsychometricFamily::cumulative_gaussian;
  double pse = 0;
  double slope_sigma = 1;
  double log_likelihood = 0;
  int n_trials = 0;
  FitStatus status = FitStatus::ok;
  std::vector<std::string> warnings;
  // Search box used by the optimiser.
  double pse_min = 0;
  double pse_max = 0;
  double sigma_min = 0;
  double sigma_max = 0;
};

double log_likelihood(const std::vector<PsychometricPoint>& points, PsychometricFamily family,
                      double pse, double sigma);

// Maximum likelihood over pse in [min d - spacing, max d + spacing] and sigma
// in [sigma_min, sigma_max]: grid refinement, then Newton steps on
// z = a + b d where the log-likelihood is concave.
PsychometricFit fit_psychometric(const std::vector<PsychometricPoint>& points,
                                 PsychometricFamily family = PsychometricFamily::cumulative_gaussian);

struct IllusoryReduction {
  int comparator_intensity = 150;
  double reduction = 0;
  double perceived_intensity = 150;
};

IllusoryReduction illusory_reduction(const PsychometricFit& fit, int comparator_intensity = 150);

// Perceived comparator = physical - true_reduction + N(0, noise_sigma);
// standard judged brighter iff its level exceeds that. The noise for a trial
// depends only on (seed, trial_id).
std::vector<TrialResult> simulate_observer(double true_reduction, double noise_sigma,
                                           const std::vector<TrialSpec>& schedule,
                                           std::uint64_t seed);

struct SessionData {
  std::string subject_id;
  Family family = Family::sbc;
  int comparator_intensity = 150;
  std::vector<TrialResult> results;
};

inline constexpr std::array<Family, 4> kTableFamilies{Family::sbc, Family::white, Family::grating,
                                                      Family::grid};

struct ReductionTable {
  std::vector<std::string> subjects;  // row order: first appearance
  // cells[subject][column]; column order follows kTableFamilies.
  std::map<std::string, std::array<std::optional<double>, 4>> cells;
  std::array<std::optional<double>, 4> averages;
};

// Pools sessions per (subject, family), fits each cell and averages the
// present cells per column.
ReductionTable reduction_table(const std::vector<SessionData>& sessions,
                               PsychometricFamily family = PsychometricFamily::cumulative_gaussian);

std::string to_csv(const ReductionTable& table);
nlohmann::json to_json(const ReductionTable& table);

nlohmann::json to_json(const TrialSpec& trial);
TrialSpec trial_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialResult& result);
TrialResult trial_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PsychometricPoint& point);
nlohmann::json to_json(const PsychometricFit& fit);
nlohmann::json to_json(const IllusoryReduction& reduction);

}  // namespace illum
