#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <set>
#include <thread>

#include "helpers.hpp"
#include "illum/error.hpp"
#include "illum/png_io.hpp"
#include "illum/server.hpp"

using namespace illum;
using nlohmann::json;
using testing_support::slurp;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

// A server on an ephemeral port, running on its own thread.
class LiveServer {
 public:
  explicit LiveServer(const fs::path& log_dir, bool restore = true)
      : server_(ServerOptions{"127.0.0.1", 0, log_dir, std::nullopt, restore}),
        port_(server_.bind()),
        thread_([this] { server_.run(); }),
        client_("127.0.0.1", port_) {
    client_.set_read_timeout(60, 0);
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }

  httplib::Client& client() { return client_; }
  ExperimentServer& server() { return server_; }

  std::pair<int, json> get(const std::string& path) {
    auto r = client_.Get(path);
    REQUIRE(r);
    return {r->status, json::parse(r->body)};
  }
  std::pair<int, json> post(const std::string& path, const std::string& body) {
    auto r = client_.Post(path, body, "application/json");
    REQUIRE(r);
    return {r->status, json::parse(r->body)};
  }
  std::pair<int, json> post(const std::string& path, const json& body) {
    return post(path, body.dump());
  }

 private:
  ExperimentServer server_;
  int port_;
  std::thread thread_;
  httplib::Client client_;
};

Image decode_b64(const json& s) { return decode_png(base64_decode(s.get<std::string>())); }

// Reads the standard level at the marker band from the payload alone.
struct Seen {
  int standard_level = -1;
  bool standard_left = false;
};

Seen inspect(const json& trial) {
  const auto left = decode_b64(trial["left_image"]);
  const auto right = decode_b64(trial["right_image"]);
  const auto& layout = trial["layout"];
  Seen s;
  s.standard_left = left.width() == kStripWidth && right.width() != kStripWidth;
  const auto& strip = s.standard_left ? left : right;
  const int offset = layout[s.standard_left ? "left_offset_y" : "right_offset_y"];
  const int top = layout["marker_y_top"].get<int>() - offset;
  const int bottom = layout["marker_y_bottom"].get<int>() - offset;
  std::set<int> levels;
  for (int y = top; y < bottom; ++y)
    for (int x = 0; x < strip.width(); ++x) levels.insert(strip.at(x, y));
  if (levels.size() == 1) s.standard_level = *levels.begin();
  return s;
}

json small_session(const std::string& subject, int n = 33, std::uint64_t seed = 4) {
  return {{"subject_id", subject}, {"family", "sbc"}, {"n_trials", n}, {"seed", seed},
          {"pool_size", 20}};
}

}  // namespace

TEST_SUITE("server") {

TEST_CASE("status mapping") {
  CHECK(http_status(ErrorKind::parameter) == 400);
  CHECK(http_status(ErrorKind::precondition) == 400);
  CHECK(http_status(ErrorKind::not_found) == 404);
  CHECK(http_status(ErrorKind::conflict) == 409);
  CHECK(http_status(ErrorKind::protocol) == 422);
  CHECK(http_status(ErrorKind::unfittable) == 422);
  CHECK(http_status(ErrorKind::io) == 500);
}

TEST_CASE("session config is strict") {
  CHECK(session_config_from_json(small_session("a")).n_trials == 33);
  CHECK_THROWS_AS(session_config_from_json({{"subject_id", "a"}, {"colour", 1}}), Error);
  CHECK_THROWS_AS(session_config_from_json({{"family", "sbc"}}), Error);
  CHECK_THROWS_AS(session_config_from_json({{"subject_id", "a"}, {"family", "sbcx"}}), Error);
  const auto c = session_config_from_json(small_session("b"));
  CHECK(session_config_from_json(to_json(c)).seed == c.seed);
}

TEST_CASE("standard strip and display geometry") {
  SessionConfig cfg;
  cfg.subject_id = "g";
  cfg.n_trials = 40;
  cfg.pool_size = 40;
  for (Family f : kTableFamilies) {
    cfg.family = f;
    Session s("x", cfg);
    for (const auto& t : s.schedule()) {
      const auto strip = render_standard(t.standard);
      REQUIRE(strip.width() == kStripWidth);
      REQUIRE(strip.height() == 11 * kSegmentHeight);
      const auto d = trial_display(t);
      const auto rendering = render(t.comparator);
      const bool comp_left = t.comparator_side == Side::left;
      CHECK((comp_left ? d.left : d.right).pixels().size() == rendering.image.pixels().size());
      const int offset = comp_left ? d.right_offset_y : d.left_offset_y;
      CHECK((comp_left ? d.left_offset_y : d.right_offset_y) == 0);
      // Marker band covers exactly the comparison segment of the strip.
      CHECK(d.marker_y_bottom - d.marker_y_top == kSegmentHeight);
      CHECK(d.marker_y_top - offset == t.standard.comparison_segment_index * kSegmentHeight);
      for (int y = d.marker_y_top; y < d.marker_y_bottom; ++y)
        CHECK(strip.at(kStripWidth / 2, y - offset) == t.standard.comparison_level());
      // and passes through the comparator's target.
      const int mid = (d.marker_y_top + d.marker_y_bottom) / 2;
      bool hit = false;
      for (int x = 0; x < rendering.mask.width(); ++x) hit = hit || rendering.mask.at(x, mid);
      CHECK(hit);
    }
  }
}

TEST_CASE("HTTP session lifecycle") {
  TempDir dir("server");
  LiveServer live(dir.path());

  auto [st, health] = live.get("/health");
  CHECK(st == 200);
  CHECK(health["status"] == "ok");

  CHECK(live.post("/sessions", json{{"subject_id", "h"}, {"family", "hermann"}}).first == 422);
  CHECK(live.post("/sessions", std::string("{not json")).first == 400);
  CHECK(live.post("/sessions", json{{"subject_id", "h"}, {"bogus", 1}}).first == 400);
  CHECK(live.post("/sessions", json{{"subject_id", "h"}, {"n_trials", 5}}).first == 400);
  CHECK(live.get("/sessions/nope/trial").first == 404);

  auto [cs, created] = live.post("/sessions", small_session("alice"));
  REQUIRE(cs == 201);
  const std::string id = created["session_id"];
  CHECK(created["n_trials"] == 33);
  const std::string base = "/sessions/" + id;
  CHECK(fs::exists(dir.path() / (id + ".jsonl")));
  CHECK(live.get("/sessions").second["sessions"] == json::array({id}));

  // Same seed, another session: identical schedule.
  auto [cs2, created2] = live.post("/sessions", small_session("alice"));
  REQUIRE(cs2 == 201);
  CHECK(created2["session_id"] != id);
  {
    auto& store = live.server().store();
    const auto a = store.get(id)->session.state_json()["schedule"];
    const auto b = store.get(created2["session_id"])->session.state_json()["schedule"];
    CHECK(a == b);
  }

  CHECK(live.get(base + "/results").first == 422);  // nothing answered yet

  auto [ts, first] = live.get(base + "/trial");
  REQUIRE(ts == 200);
  CHECK(first["index"] == 0);
  CHECK(first["done"] == false);
  CHECK(first["fixation_ms"] == 1000);
  CHECK(first["exposure_ms"] == 3000);
  CHECK(first["iti_ms"] == 500);
  CHECK_FALSE(first.contains("comparator_side"));
  CHECK(live.get(base + "/trial").second == first);  // idempotent

  CHECK(live.post(base + "/responses", json{{"trial_id", 1}, {"key", "ONE"}}).first == 422);
  CHECK(live.post(base + "/responses", json{{"trial_id", 0}, {"key", "THREE"}}).first == 400);
  CHECK(live.post(base + "/responses", json{{"trial_id", 99}, {"key", "ONE"}}).first == 404);

  const auto& schedule = live.server().store().get(id)->session.schedule();
  int answered = 0;
  for (;;) {
    auto [s, trial] = live.get(base + "/trial");
    REQUIRE(s == 200);
    if (trial["done"] == true) break;
    const int tid = trial["trial_id"];
    CHECK(tid == answered);
    const auto seen = inspect(trial);
    CHECK(seen.standard_level == schedule[tid].standard.comparison_level());
    CHECK(seen.standard_left == (schedule[tid].comparator_side == Side::right));
    // Comparator looks brighter when it physically is.
    const bool one = 150 - 30 > seen.standard_level;
    auto [ps, ack] = live.post(base + "/responses",
                               json{{"trial_id", tid}, {"key", one ? "ONE" : "TWO"}, {"reaction_ms", 500}});
    REQUIRE(ps == 201);
    CHECK(ack["response"] == (one ? "comparator_brighter" : "standard_brighter"));
    ++answered;
    CHECK(ack["remaining"] == 33 - answered);
    if (answered == 1) {
      const auto log_before = slurp(dir.path() / (id + ".jsonl"));
      CHECK(live.post(base + "/responses", json{{"trial_id", 0}, {"key", "TWO"}}).first == 409);
      CHECK(slurp(dir.path() / (id + ".jsonl")) == log_before);
    }
  }
  CHECK(answered == 33);
  CHECK(live.post(base + "/responses", json{{"trial_id", 32}, {"key", "ONE"}}).first == 409);

  auto [rs, results] = live.get(base + "/results");
  REQUIRE(rs == 200);
  CHECK(results["complete"] == true);
  CHECK(results["n_completed"] == 33);
  int sum = 0;
  for (const auto& p : results["points"]) sum += p["n_trials"].get<int>();
  CHECK(sum == 33);
  CHECK(results["fit"]["status"] == "ok");
  // A noiseless observer at reduction 30: pse between the bracketing levels.
  CHECK(results["reduction"]["reduction"].get<double>() > 22);
  CHECK(results["reduction"]["reduction"].get<double>() < 45);
}

TEST_CASE("parallel sessions stay independent") {
  TempDir dir("server_par");
  LiveServer live(dir.path());
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    auto [s, c] = live.post("/sessions", small_session("p" + std::to_string(i), 22, i));
    REQUIRE(s == 201);
    ids.push_back(c["session_id"]);
  }
  std::vector<std::thread> workers;
  std::atomic<int> failures{0};
  for (const auto& id : ids)
    workers.emplace_back([&, id] {
      httplib::Client c("127.0.0.1", live.client().port());
      for (int t = 0; t < 22; ++t) {
        auto r = c.Post("/sessions/" + id + "/responses",
                        json{{"trial_id", t}, {"key", t % 2 ? "ONE" : "TWO"}}.dump(), "application/json");
        if (!r || r->status != 201) ++failures;
      }
    });
  for (auto& w : workers) w.join();
  CHECK(failures == 0);
  for (const auto& id : ids) CHECK(live.server().store().get(id)->session.complete());
}

TEST_CASE("logs replay to identical state and restore on restart") {
  TempDir dir("server_replay");
  std::string id;
  json state;
  {
    LiveServer live(dir.path());
    auto [s, c] = live.post("/sessions", small_session("r", 25, 77));
    REQUIRE(s == 201);
    id = c["session_id"];
    for (int t = 0; t < 12; ++t)
      REQUIRE(live.post("/sessions/" + id + "/responses",
                        json{{"trial_id", t}, {"key", t % 3 ? "ONE" : "TWO"}, {"reaction_ms", 400 + t}})
                  .first == 201);
    state = live.server().store().get(id)->session.state_json();
  }
  const auto log = dir.path() / (id + ".jsonl");
  CHECK(replay_session(log).state_json() == state);

  {
    LiveServer live(dir.path());
    CHECK(live.server().store().get(id)->session.state_json() == state);
    CHECK(live.get("/sessions/" + id + "/trial").second["trial_id"] == 12);
    CHECK(live.post("/sessions/" + id + "/responses", json{{"trial_id", 12}, {"key", "ONE"}}).first ==
          201);
  }
  {
    LiveServer fresh(dir.path(), false);
    CHECK(fresh.get("/sessions/" + id + "/trial").first == 404);
  }

  // A tampered trial line no longer matches the regenerated schedule.
  auto text = slurp(log);
  const auto pos = text.find("\"comparison_segment_index\":");
  REQUIRE(pos != std::string::npos);
  auto lines_start = text.find('\n') + 1;
  REQUIRE(pos > lines_start);
  const auto digit = pos + std::string("\"comparison_segment_index\":").size();
  text[digit] = text[digit] == '0' ? '1' : '0';
  std::ofstream(log, std::ios::binary | std::ios::trunc) << text;
  try {
    replay_session(log);
    FAIL("tampered log replayed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::protocol);
  }
}

}  // TEST_SUITE
