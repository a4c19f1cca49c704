#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "illum/dataset.hpp"
#include "illum/metrics.hpp"
#include "illum/server.hpp"

namespace illum {

// Everything the command line can be configured with from one JSON file.
// Command-line flags override these values.
struct RunConfig {
  std::optional<std::uint64_t> seed;  // overrides sweep.seed when set
  SweepConfig sweep;
  std::filesystem::path out_dir = "corpus";
  std::vector<Family> families;  // empty: all with a nonzero target
  int augment_target = 3000;
  double threshold = kDefaultThreshold;
  LossConfig loss;
  ServerOptions server;

  std::uint64_t effective_seed() const { return seed.value_or(sweep.seed); }
};

// Strict: unknown keys anywhere are configuration errors.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace illum
