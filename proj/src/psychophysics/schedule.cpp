#include <algorithm>
#include <cmath>
#include <numeric>

#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/psychophysics.hpp"
#include "illum/rng.hpp"
#include "illum/spec_json.hpp"

namespace illum {

using nlohmann::json;

namespace {

template <typename It>
void shuffle(It first, It last, CounterRng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) std::iter_swap(first + (i - 1), first + rng.below(i));
}

const char* response_name(Response r) {
  return r == Response::comparator_brighter ? "comparator_brighter" : "standard_brighter";
}

}  // namespace

Response response_for(Key key) {
  return key == Key::one ? Response::comparator_brighter : Response::standard_brighter;
}

void check_comparator(const StimulusSpec& spec) {
  const Family family = family_of(spec);
  if (family == Family::hermann)
    throw Error(ErrorKind::protocol,
                "hermann grids cannot be matched: their illusory blobs are not physically present");
  if (!target_intensity(spec))
    throw Error(ErrorKind::protocol,
                std::string(to_string(family)) + " stimuli have no uniform target to match");
}

std::vector<TrialSpec> schedule_session(const std::vector<StimulusSpec>& stimuli, int n_trials,
                                        std::uint64_t seed, const ScheduleOptions& options) {
  if (n_trials < static_cast<int>(kStandardLevels.size()))
    throw Error(ErrorKind::precondition,
                "a session needs at least 11 trials, got " + std::to_string(n_trials));
  if (stimuli.empty()) throw Error(ErrorKind::precondition, "no comparator stimuli");
  if (options.fixation_ms < 0 || options.exposure_ms <= 0)
    throw Error(ErrorKind::parameter, "fixation and exposure durations must be positive");
  for (const auto& s : stimuli) {
    check_comparator(s);
    validate(s);
  }

  std::vector<Side> sides(n_trials, Side::right);
  std::fill(sides.begin(), sides.begin() + n_trials / 2, Side::left);
  CounterRng side_rng(seed, "sides");
  shuffle(sides.begin(), sides.end(), side_rng);

  const std::uint64_t trial_key = hash_combine(seed, fnv1a64("trial"));
  std::vector<TrialSpec> out(n_trials);
  for (int i = 0; i < n_trials; ++i) {
    CounterRng rng(trial_key, static_cast<std::uint64_t>(i));
    TrialSpec& t = out[i];
    t.trial_id = i;
    std::iota(t.standard.permutation.begin(), t.standard.permutation.end(), 0);
    shuffle(t.standard.permutation.begin(), t.standard.permutation.end(), rng);
    t.standard.comparison_segment_index = static_cast<int>(rng.below(kStandardLevels.size()));
    t.comparator = stimuli[rng.below(stimuli.size())];
    t.comparator_intensity = *target_intensity(t.comparator);
    t.comparator_side = sides[i];
    t.fixation_ms = options.fixation_ms;
    t.exposure_ms = options.exposure_ms;
  }
  return out;
}

std::vector<StimulusSpec> comparator_pool(Family family, std::uint64_t seed, int intensity,
                                          std::size_t size) {
  if (family == Family::hermann || family == Family::non_illusion || family == Family::mach_band)
    throw Error(ErrorKind::protocol,
                std::string(to_string(family)) + " stimuli cannot serve as comparators");
  if (size == 0) throw Error(ErrorKind::parameter, "comparator pool size must be positive");
  SweepConfig config;
  std::vector<std::pair<std::uint64_t, StimulusSpec>> keyed;
  for (auto& spec : candidates(config, family)) {
    if (target_intensity(spec) != intensity) continue;
    keyed.emplace_back(hash_combine(seed, fnv1a64(stimulus_id(spec))), std::move(spec));
  }
  if (keyed.empty())
    throw Error(ErrorKind::precondition, "no " + std::string(to_string(family)) +
                                             " stimulus has a target at " + std::to_string(intensity));
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<StimulusSpec> out;
  for (std::size_t i = 0; i < std::min(size, keyed.size()); ++i) out.push_back(keyed[i].second);
  return out;
}

std::vector<PsychometricPoint> aggregate(const std::vector<TrialResult>& results) {
  std::map<int, PsychometricPoint> by_d;
  for (const auto& r : results) {
    auto& p = by_d[r.d];
    p.d = r.d;
    ++p.n_trials;
    p.n_standard_brighter += r.response == Response::standard_brighter;
  }
  std::vector<PsychometricPoint> out;
  for (const auto& [d, p] : by_d) out.push_back(p);
  return out;
}

std::vector<TrialResult> simulate_observer(double true_reduction, double noise_sigma,
                                           const std::vector<TrialSpec>& schedule,
                                           std::uint64_t seed) {
  if (!std::isfinite(true_reduction) || !std::isfinite(noise_sigma) || noise_sigma < 0)
    throw Error(ErrorKind::parameter, "observer needs a finite reduction and noise sigma >= 0");
  const std::uint64_t key = hash_combine(seed, fnv1a64("observer"));
  std::vector<TrialResult> out;
  out.reserve(schedule.size());
  for (const auto& t : schedule) {
    CounterRng rng(key, static_cast<std::uint64_t>(t.trial_id));
    const double noise = rng.normal() * noise_sigma;
    const double perceived = t.comparator_intensity - true_reduction + noise;
    TrialResult r;
    r.trial_id = t.trial_id;
    r.d = t.d();
    r.response = t.standard.comparison_level() > perceived ? Response::standard_brighter
                                                            : Response::comparator_brighter;
    r.reaction_ms = 450.0 + 400.0 * rng.uniform();
    out.push_back(r);
  }
  return out;
}

json to_json(const TrialSpec& t) {
  return {{"trial_id", t.trial_id},
          {"comparator", to_json(t.comparator)},
          {"comparator_intensity", t.comparator_intensity},
          {"standard",
           {{"permutation", t.standard.permutation},
            {"comparison_segment_index", t.standard.comparison_segment_index}}},
          {"comparator_side", t.comparator_side == Side::left ? "left" : "right"},
          {"fixation_ms", t.fixation_ms},
          {"exposure_ms", t.exposure_ms},
          {"d", t.d()}};
}

TrialSpec trial_from_json(const json& j) {
  try {
    TrialSpec t;
    t.trial_id = j.at("trial_id").get<int>();
    t.comparator = stimulus_from_json(j.at("comparator"));
    t.comparator_intensity = j.at("comparator_intensity").get<int>();
    const auto perm = j.at("standard").at("permutation").get<std::vector<int>>();
    if (perm.size() != kStandardLevels.size())
      throw Error(ErrorKind::configuration, "standard permutation must have 11 entries");
    std::array<bool, 11> seen{};
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (perm[i] < 0 || perm[i] > 10 || seen[perm[i]])
        throw Error(ErrorKind::configuration, "standard permutation is not a permutation of 0..10");
      seen[perm[i]] = true;
      t.standard.permutation[i] = perm[i];
    }
    t.standard.comparison_segment_index =
        j.at("standard").at("comparison_segment_index").get<int>();
    if (t.standard.comparison_segment_index < 0 || t.standard.comparison_segment_index > 10)
      throw Error(ErrorKind::configuration, "comparison_segment_index out of range");
    const auto side = j.at("comparator_side").get<std::string>();
    if (side != "left" && side != "right")
      throw Error(ErrorKind::configuration, "comparator_side must be left or right");
    t.comparator_side = side == "left" ? Side::left : Side::right;
    t.fixation_ms = j.value("fixation_ms", 1000);
    t.exposure_ms = j.value("exposure_ms", 3000);
    return t;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::configuration, std::string("malformed trial: ") + ex.what());
  }
}

json to_json(const TrialResult& r) {
  return {{"trial_id", r.trial_id},
          {"response", response_name(r.response)},
          {"reaction_ms", r.reaction_ms},
          {"d", r.d}};
}

TrialResult trial_result_from_json(const json& j) {
  try {
    TrialResult r;
    r.trial_id = j.at("trial_id").get<int>();
    const auto resp = j.at("response").get<std::string>();
    if (resp == "comparator_brighter")
      r.response = Response::comparator_brighter;
    else if (resp == "standard_brighter")
      r.response = Response::standard_brighter;
    else
      throw Error(ErrorKind::configuration, "unknown response '" + resp + "'");
    r.reaction_ms = j.at("reaction_ms").get<double>();
    r.d = j.at("d").get<int>();
    return r;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::configuration, std::string("malformed trial result: ") + ex.what());
  }
}

json to_json(const PsychometricPoint& p) {
  return {{"d", p.d}, {"n_trials", p.n_trials}, {"n_standard_brighter", p.n_standard_brighter}};
}

}  // namespace illum
