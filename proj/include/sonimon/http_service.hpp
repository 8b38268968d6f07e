#pragma once

#include <memory>
#include <string>
#include <thread>

#include "sonimon/experiment.hpp"

namespace httplib {
class Server;
}

namespace sonimon {

// HTTP front end of ExperimentService.
//   POST /api/session                          -> session state
//   GET  /api/session/{id}                     -> session state
//   POST /api/session/{id}/advance             -> session state (+ "passed" for qualifiers)
//   GET  /api/session/{id}/level/{k}/plan      -> {level_id, duration, sequence_seed, ...}
//   GET  /api/session/{id}/level/{k}/audio     -> audio/wav
//   GET  /api/session/{id}/level/{k}/stream    -> chunked audio/wav (live_audio only)
//   POST /api/session/{id}/event               -> ack
//   POST /api/session/{id}/survey              -> session state
//   GET  /api/export[?ecology=E]               -> export document
//   GET  /api/health
// {k} is a main-level index (0-9) or a training level ("q" = current, "q1".."q3").
class HttpServer {
 public:
  explicit HttpServer(ExperimentService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Throws std::runtime_error if the address is taken.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // Runs listen() on a background thread.
  void start();
  void stop();
  int port() const { return port_; }

 private:
  void routes();
  ExperimentService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace sonimon
