#include <httplib.h>

#include "illum/png_io.hpp"
#include "illum/server.hpp"
#include "illum/version.hpp"

namespace illum {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  send_json(res, http_status(kind), {{"error", std::string(to_string(kind))}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::parameter, std::string("request body is not JSON: ") + ex.what());
  }
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.kind(), e.what());
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
    }
  };
}

Key key_from(const json& j) {
  const auto k = j.get<std::string>();
  if (k == "ONE" || k == "one" || k == "1") return Key::one;
  if (k == "TWO" || k == "two" || k == "2") return Key::two;
  throw Error(ErrorKind::parameter, "key must be ONE or TWO");
}

json trial_payload(const Session& s, const TrialSpec& t) {
  const auto d = trial_display(t);
  return {{"session_id", s.id()},
          {"trial_id", t.trial_id},
          {"index", t.trial_id},
          {"total", s.schedule().size()},
          {"done", false},
          {"left_image", base64_encode(encode_png(d.left))},
          {"right_image", base64_encode(encode_png(d.right))},
          {"layout",
           {{"left_offset_y", d.left_offset_y},
            {"right_offset_y", d.right_offset_y},
            {"marker_y_top", d.marker_y_top},
            {"marker_y_bottom", d.marker_y_bottom}}},
          {"fixation_ms", t.fixation_ms},
          {"exposure_ms", t.exposure_ms},
          {"iti_ms", s.config().iti_ms}};
}

}  // namespace

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::precondition:
    case ErrorKind::parameter:
    case ErrorKind::configuration:
    case ErrorKind::dimension:
    case ErrorKind::geometry: return 400;
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::protocol:
    case ErrorKind::compatibility:
    case ErrorKind::unfittable: return 422;
    case ErrorKind::io: return 500;
  }
  return 500;
}

ExperimentServer::ExperimentServer(ServerOptions options)
    : options_(std::move(options)), store_(options_.log_dir),
      http_(std::make_unique<httplib::Server>()) {
  if (options_.restore) store_.restore();
  routes();
}

ExperimentServer::~ExperimentServer() { stop(); }

void ExperimentServer::routes() {
  auto& http = *http_;
  if (options_.static_dir && !http.set_mount_point("/", options_.static_dir->string()))
    throw Error(ErrorKind::io, "cannot serve static files from " + options_.static_dir->string());

  http.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"version", kVersion}});
  }));

  http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto config = session_config_from_json(parse_body(req));
    auto entry = store_.create(config);
    std::lock_guard lock(entry->mutex);
    send_json(res, 201, {{"session_id", entry->session.id()},
                         {"subject_id", config.subject_id},
                         {"family", std::string(to_string(config.family))},
                         {"n_trials", entry->session.schedule().size()}});
  }));

  http.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"sessions", store_.ids()}});
  }));

  http.Get(R"(/sessions/([^/]+)/trial)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto entry = store_.get(req.matches[1]);
             std::lock_guard lock(entry->mutex);
             const auto& s = entry->session;
             if (const auto* t = s.current())
               send_json(res, 200, trial_payload(s, *t));
             else
               send_json(res, 200, {{"session_id", s.id()}, {"done", true},
                                    {"total", s.schedule().size()}});
           }));

  http.Post(R"(/sessions/([^/]+)/responses)",
            guarded([this](const httplib::Request& req, httplib::Response& res) {
              const auto body = parse_body(req);
              auto entry = store_.get(req.matches[1]);
              int trial_id = 0;
              Key key = Key::one;
              double rt = 0;
              try {
                trial_id = body.at("trial_id").get<int>();
                key = key_from(body.at("key"));
                rt = body.value("reaction_ms", 0.0);
              } catch (const json::exception& ex) {
                throw Error(ErrorKind::parameter, std::string("bad response body: ") + ex.what());
              }
              std::lock_guard lock(entry->mutex);
              auto& s = entry->session;
              const auto& r = s.record(trial_id, key, rt);
              entry->log.append(s.schedule()[trial_id], r);
              send_json(res, 201, {{"trial_id", r.trial_id},
                                   {"response", to_json(r)["response"]},
                                   {"remaining", s.schedule().size() - s.results().size()}});
            }));

  http.Get(R"(/sessions/([^/]+)/results)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto entry = store_.get(req.matches[1]);
             std::lock_guard lock(entry->mutex);
             const auto& s = entry->session;
             const auto fit = s.fit();
             const auto reduction = illusory_reduction(fit, s.config().comparator_intensity);
             json points = json::array();
             for (const auto& p : aggregate(s.results())) points.push_back(to_json(p));
             send_json(res, 200, {{"session_id", s.id()},
                                  {"subject_id", s.config().subject_id},
                                  {"family", std::string(to_string(s.config().family))},
                                  {"n_completed", s.results().size()},
                                  {"complete", s.complete()},
                                  {"points", points},
                                  {"fit", to_json(fit)},
                                  {"reduction", to_json(reduction)}});
           }));
}

int ExperimentServer::bind() {
  if (options_.port == 0) {
    const int port = http_->bind_to_any_port(options_.host);
    if (port < 0) throw Error(ErrorKind::io, "cannot bind " + options_.host);
    return port;
  }
  if (!http_->bind_to_port(options_.host, options_.port))
    throw Error(ErrorKind::io, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  return options_.port;
}

void ExperimentServer::run() { http_->listen_after_bind(); }

void ExperimentServer::stop() {
  if (http_) http_->stop();
}

}  // namespace illum
