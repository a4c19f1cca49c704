#include <algorithm>
#include <cmath>
#include <map>

#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/rng.hpp"

namespace illum {

namespace {

constexpr std::pair<SplitTask, const char*> kTasks[] = {
    {SplitTask::identification, "identification"},
    {SplitTask::classification, "classification"},
    {SplitTask::localization, "localization"},
};

// Ids in seeded order.
std::vector<std::string> shuffled(std::vector<std::string> ids, std::uint64_t seed) {
  std::sort(ids.begin(), ids.end(), [seed](const std::string& a, const std::string& b) {
    const auto ka = hash_combine(seed, fnv1a64(a));
    const auto kb = hash_combine(seed, fnv1a64(b));
    return ka != kb ? ka < kb : a < b;
  });
  return ids;
}

void need(std::size_t have, std::size_t want, const std::string& what) {
  if (have < want)
    throw Error(ErrorKind::precondition, "split needs " + std::to_string(want) + " " + what +
                                             ", manifest has " + std::to_string(have) +
                                             " (short by " + std::to_string(want - have) + ")");
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from, std::size_t begin,
            std::size_t end) {
  to.insert(to.end(), from.begin() + static_cast<std::ptrdiff_t>(begin),
            from.begin() + static_cast<std::ptrdiff_t>(end));
}

}  // namespace

std::string_view to_string(SplitTask task) {
  for (const auto& [t, name] : kTasks)
    if (t == task) return name;
  return "?";
}

SplitTask split_task_from_string(std::string_view name) {
  if (name == "id") return SplitTask::identification;
  if (name == "clf") return SplitTask::classification;
  if (name == "loc") return SplitTask::localization;
  for (const auto& [t, n] : kTasks)
    if (name == n) return t;
  throw Error(ErrorKind::configuration, "unknown split task '" + std::string(name) + "'");
}

nlohmann::json to_json(const SplitSpec& split) {
  return {{"task", std::string(to_string(split.task))},
          {"seed", split.seed},
          {"train_ids", split.train_ids},
          {"test_ids", split.test_ids}};
}

SplitSpec make_splits(const Manifest& manifest, SplitTask task, std::uint64_t seed,
                      const SplitSizes& sizes) {
  SplitSpec split;
  split.task = task;
  split.seed = seed;

  std::vector<std::string> illusions;
  std::vector<std::string> non_illusions;
  std::map<Family, std::vector<std::string>> by_family;
  for (const auto& e : manifest.entries) {
    if (e.label == Label::illusion) {
      illusions.push_back(e.id);
      by_family[e.family].push_back(e.id);
    } else {
      non_illusions.push_back(e.id);
    }
  }

  switch (task) {
    case SplitTask::identification: {
      const auto ill = shuffled(illusions, seed);
      const auto non = shuffled(non_illusions, seed);
      const auto n_ill = static_cast<std::size_t>(sizes.identification_train_illusions);
      const auto n_train = static_cast<std::size_t>(sizes.identification_train_non_illusions);
      const auto n_test = static_cast<std::size_t>(sizes.identification_test_non_illusions);
      need(ill.size(), n_ill + 1, "illusions");
      need(non.size(), n_train + n_test, "non-illusions");
      append(split.train_ids, ill, 0, n_ill);
      append(split.train_ids, non, 0, n_train);
      append(split.test_ids, non, n_train, n_train + n_test);
      append(split.test_ids, ill, n_ill, ill.size());
      break;
    }
    case SplitTask::classification: {
      const auto per_class = static_cast<std::size_t>(sizes.classification_train_per_class);
      need(by_family.size(), 2, "illusion classes");
      for (const auto& [family, ids] : by_family) {
        const auto order = shuffled(ids, seed);
        need(order.size(), per_class, std::string(to_string(family)) + " illusions");
        append(split.train_ids, order, 0, per_class);
        append(split.test_ids, order, per_class, order.size());
      }
      break;
    }
    case SplitTask::localization: {
      const auto order = shuffled(illusions, seed);
      need(order.size(), 2, "illusions");
      const auto n_train = static_cast<std::size_t>(
          std::floor(sizes.localization_train_fraction * static_cast<double>(order.size()) + 1e-9));
      append(split.train_ids, order, 0, n_train);
      append(split.test_ids, order, n_train, order.size());
      break;
    }
  }
  return split;
}

}  // namespace illum
