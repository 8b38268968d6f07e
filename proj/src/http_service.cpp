#include "sonimon/http_service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>

#include "sonimon/log.hpp"
#include "sonimon/rng.hpp"
#include "sonimon/synth.hpp"

namespace sonimon {

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, Json{{"error", message}}, status);
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::exception& e) {
    throw ServiceError(400, std::string("malformed JSON: ") + e.what());
  }
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      log_warning(std::string("request failed: ") + e.what());
      send_error(res, 500, e.what());
    }
  };
}

std::string pcm16(const std::vector<double>& block, int sample_rate) {
  AudioBuffer b(sample_rate, 0);
  b.samples = block;
  const auto bytes = encode_wav(b);
  return std::string(bytes.begin() + 44, bytes.end());
}

std::string streaming_header(int sample_rate) {
  auto bytes = encode_wav(AudioBuffer(sample_rate, 0));
  // Unknown length.
  for (std::size_t off : {std::size_t{4}, std::size_t{40}}) {
    for (std::size_t i = 0; i < 4; ++i) bytes[off + i] = 0xFF;
  }
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

HttpServer::HttpServer(ExperimentService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  // The library default sets SO_REUSEPORT, which lets a second server share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server_->set_tcp_nodelay(true);
  server_->set_keep_alive_max_count(1000);
  routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& s = *server_;
  auto& svc = service_;

  s.Get("/api/health", guarded([&svc](const httplib::Request&, httplib::Response& res) {
          Json counts = Json::object();
          for (const auto& [e, n] : svc.completed_counts()) counts[std::string(ecology_name(e))] = n;
          send_json(res, Json{{"status", "ok"}, {"completed", counts}});
        }));

  s.Post("/api/session", guarded([&svc](const httplib::Request&, httplib::Response& res) {
           send_json(res, svc.create_session());
         }));

  s.Get(R"(/api/session/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          send_json(res, svc.session_state(req.matches[1]));
        }));

  s.Post(R"(/api/session/([^/]+)/advance)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           send_json(res, svc.advance(req.matches[1], parse_body(req)));
         }));

  s.Post(R"(/api/session/([^/]+)/event)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           send_json(res, svc.record_event(req.matches[1], parse_body(req)));
         }));

  s.Post(R"(/api/session/([^/]+)/survey)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           send_json(res, svc.submit_survey(req.matches[1], parse_body(req)));
         }));

  s.Get(R"(/api/session/([^/]+)/level/([^/]+)/plan)",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          send_json(res, svc.plan(req.matches[1], req.matches[2]));
        }));

  s.Get(R"(/api/session/([^/]+)/level/([^/]+)/audio)",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          const auto wav = svc.audio(req.matches[1], req.matches[2]);
          res.set_content(reinterpret_cast<const char*>(wav->data()), wav->size(), "audio/wav");
        }));

  s.Get(R"(/api/session/([^/]+)/level/([^/]+)/stream)",
        guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          if (!svc.config().live_audio) throw ServiceError(404, "live audio is disabled");
          const auto [level, eco] = svc.resolve(req.matches[1], req.matches[2]);
          const int sr = svc.config().sample_rate;
          auto renderer = std::make_shared<LiveRenderer>(
              eco, mix_seed(level.seed, static_cast<std::uint64_t>(eco)), sr);
          for (const auto& f : generate_trajectory(level, svc.config().frame_rate)) renderer->enqueue(f);
          renderer->set_end_time(level.duration);
          renderer->close();
          auto header_sent = std::make_shared<bool>(false);
          res.set_chunked_content_provider(
              "audio/wav", [renderer, header_sent, sr](std::size_t, httplib::DataSink& sink) {
                if (!*header_sent) {
                  const auto h = streaming_header(sr);
                  if (!sink.write(h.data(), h.size())) return false;
                  *header_sent = true;
                }
                const auto block = renderer->next_block();
                if (block.empty()) {
                  sink.done();
                  return true;
                }
                const auto bytes = pcm16(block, sr);
                return sink.write(bytes.data(), bytes.size());
              });
        }));

  s.Get("/api/export", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          std::optional<EcologyId> filter;
          if (req.has_param("ecology")) filter = parse_ecology(req.get_param_value("ecology"));
          send_json(res, export_to_json(svc.export_sessions(filter)));
        }));

  if (service_.config().static_dir) {
    if (!s.set_mount_point("/", service_.config().static_dir->string())) {
      log_warning("static directory not found: " + service_.config().static_dir->string());
    }
  }
}

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port) +
                             " (address in use or not permitted)");
  }
  return port_;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace sonimon
