#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "illum/error.hpp"
#include "illum/session.hpp"

namespace httplib {
class Server;
}

namespace illum {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0: any free port
  std::filesystem::path log_dir = "sessions";
  std::optional<std::filesystem::path> static_dir;
  bool restore = true;  // replay existing logs on start
};

int http_status(ErrorKind kind);

// HTTP front end for subject sessions.
//   POST /sessions                   create (201)
//   GET  /sessions                   list ids
//   GET  /sessions/{id}/trial        current trial, or {"done": true}
//   POST /sessions/{id}/responses    record one answer (201)
//   GET  /sessions/{id}/results      points, fit and reduction so far
//   GET  /health
class ExperimentServer {
 public:
  explicit ExperimentServer(ServerOptions options);
  ~ExperimentServer();

  // Binds and returns the port actually used.
  int bind();
  // Blocks until stop().
  void run();
  void stop();

  SessionStore& store() { return store_; }

 private:
  void routes();

  ServerOptions options_;
  SessionStore store_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace illum
