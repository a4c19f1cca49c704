#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "illum/image.hpp"
#include "illum/psychophysics.hpp"

namespace illum {

inline constexpr int kSessionLogSchemaVersion = 1;

struct SessionConfig {
  std::string subject_id;
  Family family = Family::sbc;
  int n_trials = 500;
  std::uint64_t seed = 0;
  int comparator_intensity = 150;
  // 0: 700 for sbc, 400 otherwise (capped by what the sweep offers).
  std::size_t pool_size = 0;
  ScheduleOptions timing;
  int iti_ms = 500;
  PsychometricFamily fit_family = PsychometricFamily::cumulative_gaussian;
};

// Strict: unknown keys and bad values are parameter errors.
SessionConfig session_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionConfig& config);

// One subject, one family. Trials are answered in schedule order.
class Session {
 public:
  Session(std::string id, SessionConfig config);

  const std::string& id() const { return id_; }
  const SessionConfig& config() const { return config_; }
  const std::vector<TrialSpec>& schedule() const { return schedule_; }
  const std::vector<TrialResult>& results() const { return results_; }

  bool complete() const { return results_.size() == schedule_.size(); }
  // Next unanswered trial; null when complete.
  const TrialSpec* current() const;

  // Duplicate answers are conflicts; answering any trial but the current one
  // is a protocol error.
  const TrialResult& record(int trial_id, Key key, double reaction_ms);
  const TrialResult& record(const TrialResult& result);

  PsychometricFit fit() const;
  SessionData data() const;
  nlohmann::json state_json() const;

 private:
  std::string id_;
  SessionConfig config_;
  std::vector<TrialSpec> schedule_;
  std::vector<TrialResult> results_;
};

// Log records: the header line and one line per answered trial.
nlohmann::json session_header(const Session& session);
nlohmann::json trial_record(const TrialSpec& trial, const TrialResult& result);

// Append-only JSON lines: a header, then one trial/result pair per answer.
class SessionLog {
 public:
  SessionLog(const std::filesystem::path& path, const Session& session);  // writes the header
  void append(const TrialSpec& trial, const TrialResult& result);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Rebuilds a session from its log; every logged trial must match the
// schedule regenerated from the header.
Session replay_session(const std::filesystem::path& log_path);
Session replay_session(std::istream& in, const std::string& name = "<stdin>");

// Standard strip geometry.
inline constexpr int kSegmentHeight = 20;
inline constexpr int kStripWidth = 48;

Image render_standard(const StandardTarget& standard);

// What the subject sees for one trial. Vertical offsets place both images in
// a shared frame whose origin is the comparator's top row; the marker band is
// the comparison height in that frame.
struct TrialDisplay {
  Image left;
  Image right;
  int left_offset_y = 0;
  int right_offset_y = 0;
  int marker_y_top = 0;
  int marker_y_bottom = 0;  // exclusive
};

TrialDisplay trial_display(const TrialSpec& trial);

// Thread-safe registry of live sessions, each with its own lock and log.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path log_dir);

  struct Entry {
    std::mutex mutex;
    Session session;
    SessionLog log;
    Entry(Session s, const std::filesystem::path& path);
  };

  std::shared_ptr<Entry> create(const SessionConfig& config);
  std::shared_ptr<Entry> get(const std::string& id) const;  // not_found error
  std::vector<std::string> ids() const;
  // Replays every log in the directory; returns how many were restored.
  std::size_t restore();
  const std::filesystem::path& log_dir() const { return log_dir_; }

 private:
  std::filesystem::path log_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace illum
