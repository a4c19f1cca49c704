#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include "illum/error.hpp"
#include "illum/rng.hpp"
#include "illum/session.hpp"

namespace illum {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::size_t default_pool_size(Family family) { return family == Family::sbc ? 700 : 400; }

// Mask row nearest the vertical centre; the comparison height.
int target_row(const Mask& mask) {
  int best = -1;
  const int mid = mask.height() / 2;
  for (int y = 0; y < mask.height(); ++y) {
    bool any = false;
    for (auto v : mask.row(y)) any = any || v;
    if (any && (best < 0 || std::abs(y - mid) < std::abs(best - mid))) best = y;
  }
  if (best < 0) throw Error(ErrorKind::protocol, "comparator has an empty target mask");
  return best;
}

}  // namespace

SessionConfig session_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parameter, "session config must be a JSON object");
  static const std::set<std::string> known{
      "subject_id", "family",      "n_trials",    "seed",   "comparator_intensity",
      "pool_size",  "fixation_ms", "exposure_ms", "iti_ms", "fit_family"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error(ErrorKind::parameter, "unknown session field '" + key + "'");
  try {
    SessionConfig c;
    c.subject_id = j.at("subject_id").get<std::string>();
    c.family = family_from_string(j.at("family").get<std::string>());
    c.n_trials = j.value("n_trials", c.n_trials);
    c.seed = j.value("seed", c.seed);
    c.comparator_intensity = j.value("comparator_intensity", c.comparator_intensity);
    c.pool_size = j.value("pool_size", c.pool_size);
    c.timing.fixation_ms = j.value("fixation_ms", c.timing.fixation_ms);
    c.timing.exposure_ms = j.value("exposure_ms", c.timing.exposure_ms);
    c.iti_ms = j.value("iti_ms", c.iti_ms);
    if (j.contains("fit_family"))
      c.fit_family = psychometric_family_from_string(j["fit_family"].get<std::string>());
    if (c.subject_id.empty()) throw Error(ErrorKind::parameter, "subject_id must not be empty");
    if (c.comparator_intensity < 0 || c.comparator_intensity > 255)
      throw Error(ErrorKind::parameter, "comparator_intensity must be in [0, 255]");
    if (c.iti_ms < 0) throw Error(ErrorKind::parameter, "iti_ms must be >= 0");
    return c;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::parameter, std::string("bad session config: ") + ex.what());
  }
}

json to_json(const SessionConfig& c) {
  return {{"subject_id", c.subject_id},
          {"family", std::string(to_string(c.family))},
          {"n_trials", c.n_trials},
          {"seed", c.seed},
          {"comparator_intensity", c.comparator_intensity},
          {"pool_size", c.pool_size},
          {"fixation_ms", c.timing.fixation_ms},
          {"exposure_ms", c.timing.exposure_ms},
          {"iti_ms", c.iti_ms},
          {"fit_family", std::string(to_string(c.fit_family))}};
}

Session::Session(std::string id, SessionConfig config)
    : id_(std::move(id)), config_(std::move(config)) {
  const std::size_t pool_size =
      config_.pool_size ? config_.pool_size : default_pool_size(config_.family);
  const auto pool = comparator_pool(config_.family, config_.seed, config_.comparator_intensity,
                                    pool_size);
  schedule_ = schedule_session(pool, config_.n_trials, config_.seed, config_.timing);
  results_.reserve(schedule_.size());
}

const TrialSpec* Session::current() const {
  return complete() ? nullptr : &schedule_[results_.size()];
}

const TrialResult& Session::record(int trial_id, Key key, double reaction_ms) {
  if (trial_id < 0 || trial_id >= static_cast<int>(schedule_.size()))
    throw Error(ErrorKind::not_found, "session " + id_ + " has no trial " + std::to_string(trial_id));
  TrialResult r;
  r.trial_id = trial_id;
  r.response = response_for(key);
  r.reaction_ms = reaction_ms;
  r.d = schedule_[trial_id].d();
  return record(r);
}

const TrialResult& Session::record(const TrialResult& result) {
  const int next = static_cast<int>(results_.size());
  if (result.trial_id < next)
    throw Error(ErrorKind::conflict, "trial " + std::to_string(result.trial_id) +
                                         " of session " + id_ + " is already answered");
  if (result.trial_id != next)
    throw Error(ErrorKind::protocol, "trial " + std::to_string(result.trial_id) +
                                         " is not the current trial (" + std::to_string(next) + ")");
  if (!std::isfinite(result.reaction_ms) || result.reaction_ms < 0)
    throw Error(ErrorKind::parameter, "reaction_ms must be a finite non-negative number");
  if (result.d != schedule_[next].d())
    throw Error(ErrorKind::protocol, "result d does not match trial " + std::to_string(next));
  results_.push_back(result);
  return results_.back();
}

PsychometricFit Session::fit() const {
  return fit_psychometric(aggregate(results_), config_.fit_family);
}

SessionData Session::data() const {
  return {config_.subject_id, config_.family, config_.comparator_intensity, results_};
}

json Session::state_json() const {
  json trials = json::array();
  for (const auto& t : schedule_) trials.push_back(to_json(t));
  json results = json::array();
  for (const auto& r : results_) results.push_back(to_json(r));
  return {{"session_id", id_}, {"config", to_json(config_)}, {"schedule", trials},
          {"results", results}};
}

SessionLog::SessionLog(const fs::path& path, const Session& session) : path_(path) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw Error(ErrorKind::io, "cannot open session log " + path.string());
  if (fresh) {
    out_ << session_header(session).dump() << '\n';
    out_.flush();
  }
}

json session_header(const Session& session) {
  return {{"schema_version", kSessionLogSchemaVersion},
          {"type", "session"},
          {"session_id", session.id()},
          {"config", to_json(session.config())}};
}

json trial_record(const TrialSpec& trial, const TrialResult& result) {
  return {{"type", "trial"}, {"trial", to_json(trial)}, {"result", to_json(result)}};
}

void SessionLog::append(const TrialSpec& trial, const TrialResult& result) {
  out_ << trial_record(trial, result).dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorKind::io, "cannot append to session log " + path_.string());
}

Session replay_session(const fs::path& log_path) {
  std::ifstream in(log_path);
  if (!in) throw Error(ErrorKind::io, "cannot read session log " + log_path.string());
  return replay_session(in, log_path.string());
}

Session replay_session(std::istream& in, const std::string& name) {
  std::string line;
  std::optional<Session> session;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto where = name + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::configuration, where + ": " + ex.what());
    }
    const auto type = j.value("type", std::string());
    if (!session) {
      if (type != "session") throw Error(ErrorKind::configuration, where + ": missing session header");
      if (j.value("schema_version", 0) != kSessionLogSchemaVersion)
        throw Error(ErrorKind::configuration, where + ": unsupported session log schema_version");
      session.emplace(j.at("session_id").get<std::string>(),
                      session_config_from_json(j.at("config")));
      continue;
    }
    if (type != "trial") throw Error(ErrorKind::configuration, where + ": unexpected record");
    const auto result = trial_result_from_json(j.at("result"));
    if (result.trial_id < 0 || result.trial_id >= static_cast<int>(session->schedule().size()) ||
        to_json(session->schedule()[result.trial_id]) != j.at("trial"))
      throw Error(ErrorKind::protocol, where + ": logged trial does not match the schedule");
    session->record(result);
  }
  if (!session) throw Error(ErrorKind::configuration, name + ": empty session log");
  return std::move(*session);
}

Image render_standard(const StandardTarget& standard) {
  Image img(kStripWidth, kSegmentHeight * static_cast<int>(kStandardLevels.size()));
  for (int s = 0; s < static_cast<int>(kStandardLevels.size()); ++s)
    fill_rect(img, Rect{0, s * kSegmentHeight, kStripWidth, kSegmentHeight},
              static_cast<std::uint8_t>(standard.segment_level(s)));
  return img;
}

TrialDisplay trial_display(const TrialSpec& trial) {
  const auto rendering = render(trial.comparator);
  const int row = target_row(rendering.mask);
  const int top = row - kSegmentHeight / 2;
  const int standard_offset = top - trial.standard.comparison_segment_index * kSegmentHeight;
  TrialDisplay d;
  d.marker_y_top = top;
  d.marker_y_bottom = top + kSegmentHeight;
  Image standard = render_standard(trial.standard);
  if (trial.comparator_side == Side::left) {
    d.left = rendering.image;
    d.right = std::move(standard);
    d.right_offset_y = standard_offset;
  } else {
    d.left = std::move(standard);
    d.right = rendering.image;
    d.left_offset_y = standard_offset;
  }
  return d;
}

SessionStore::Entry::Entry(Session s, const fs::path& path)
    : session(std::move(s)), log(path, session) {}

SessionStore::SessionStore(fs::path log_dir) : log_dir_(std::move(log_dir)) {
  fs::create_directories(log_dir_);
}

std::shared_ptr<SessionStore::Entry> SessionStore::create(const SessionConfig& config) {
  // Scheduling is the slow part; do it outside the registry lock.
  std::string id;
  {
    std::lock_guard lock(mutex_);
    const std::uint64_t base = hash_combine(fnv1a64(config.subject_id), config.seed);
    do {
      id = "s" + hex16(hash_combine(base, counter_++));
    } while (sessions_.count(id) || fs::exists(log_dir_ / (id + ".jsonl")));
    sessions_[id] = nullptr;  // reserve
  }
  try {
    auto entry = std::make_shared<Entry>(Session(id, config), log_dir_ / (id + ".jsonl"));
    std::lock_guard lock(mutex_);
    sessions_[id] = entry;
    return entry;
  } catch (...) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
    throw;
  }
}

std::shared_ptr<SessionStore::Entry> SessionStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end() || !it->second)
    throw Error(ErrorKind::not_found, "no session " + id);
  return it->second;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, entry] : sessions_)
    if (entry) out.push_back(id);
  return out;
}

std::size_t SessionStore::restore() {
  std::vector<fs::path> logs;
  for (const auto& f : fs::directory_iterator(log_dir_))
    if (f.path().extension() == ".jsonl") logs.push_back(f.path());
  std::sort(logs.begin(), logs.end());
  std::size_t n = 0;
  for (const auto& path : logs) {
    auto session = replay_session(path);
    const auto id = session.id();
    auto entry = std::make_shared<Entry>(std::move(session), path);
    std::lock_guard lock(mutex_);
    if (sessions_.count(id)) continue;
    sessions_[id] = entry;
    ++n;
  }
  return n;
}

}  // namespace illum
