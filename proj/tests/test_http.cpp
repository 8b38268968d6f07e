#include <doctest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>

#include "sonimon/http_service.hpp"

using namespace sonimon;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  std::unique_ptr<ExperimentService> service;
  std::unique_ptr<HttpServer> server;
  std::unique_ptr<httplib::Client> client;

  explicit Fixture(const std::string& name, bool live = false, std::optional<fs::path> static_dir = std::nullopt)
      : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    Config c;
    c.data_dir = dir;
    c.fsync = false;
    c.enabled_ecologies = {EcologyId::Synth};
    c.live_audio = live;
    c.static_dir = static_dir;
    service = std::make_unique<ExperimentService>(c);
    server = std::make_unique<HttpServer>(*service);
    const int port = server->bind("127.0.0.1", 0);
    server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(60, 0);
  }
  ~Fixture() {
    server->stop();
    fs::remove_all(dir);
  }

  std::pair<int, Json> post(const std::string& path, const Json& body = Json::object()) {
    auto r = client->Post(path, body.dump(), "application/json");
    REQUIRE(r);
    return {r->status, Json::parse(r->body)};
  }
  std::pair<int, Json> get(const std::string& path) {
    auto r = client->Get(path);
    REQUIRE(r);
    return {r->status, Json::parse(r->body)};
  }
};

}  // namespace

TEST_CASE("health and session creation over HTTP") {
  Fixture f("sonimon_http_basic");
  auto [hs, health] = f.get("/api/health");
  CHECK(hs == 200);
  CHECK(health["status"] == "ok");

  auto [cs, created] = f.post("/api/session");
  CHECK(cs == 200);
  const auto id = created["session_id"].get<std::string>();
  CHECK(created["ecology"] == "SYNTH");
  auto [gs, state] = f.get("/api/session/" + id);
  CHECK(gs == 200);
  CHECK(state == created);
  CHECK(f.get("/api/session/missing").first == 404);
}

TEST_CASE("errors map to status codes") {
  Fixture f("sonimon_http_errors");
  const auto id = f.post("/api/session").second["session_id"].get<std::string>();
  auto r = f.client->Post("/api/session/" + id + "/advance", "{not json", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(Json::parse(r->body).contains("error"));
  CHECK(f.post("/api/session/" + id + "/advance", Json{{"phase", "MAIN"}}).first == 409);
  CHECK(f.post("/api/session/" + id + "/event", Json{{"event_id", "x"}}).first == 409);
  CHECK(f.get("/api/session/" + id + "/level/0/plan").first == 409);
  CHECK(f.get("/api/session/" + id + "/level/zz/plan").first == 404);
  CHECK(f.post("/api/session/" + id + "/survey", Json::object()).first == 409);
  CHECK(f.get("/api/export?ecology=forest").first == 400);
  auto none = f.client->Get("/api/session/" + id + "/level/q1/stream");
  REQUIRE(none);
  CHECK(none->status == 404);
}

TEST_CASE("training flow, events and export over HTTP") {
  Fixture f("sonimon_http_flow");
  const auto id = f.post("/api/session").second["session_id"].get<std::string>();
  CHECK(f.post("/api/session/" + id + "/advance", Json{{"phase", "TRAINING_TASK"}}).second["phase"] == "TRAINING_STIMULI");
  CHECK(f.post("/api/session/" + id + "/advance", Json{{"phase", "TRAINING_STIMULI"}}).second["phase"] == "TRAINING_QUALIFY");

  auto [ps, plan] = f.get("/api/session/" + id + "/level/q/plan");
  CHECK(ps == 200);
  const auto level_id = plan["level_id"].get<std::string>();
  CHECK(plan["stimulus_labels"].size() == 4);

  auto audio = f.client->Get("/api/session/" + id + "/level/q/audio");
  REQUIRE(audio);
  CHECK(audio->status == 200);
  CHECK(audio->get_header_value("Content-Type") == "audio/wav");
  auto wav = decode_wav(std::vector<std::uint8_t>(audio->body.begin(), audio->body.end()));
  CHECK(wav.duration() == doctest::Approx(plan["duration"].get<double>()).epsilon(1e-3));

  Json ev{{"type", "annotation"}, {"event_id", "h1"}, {"level_id", level_id}, {"stimulus", "DRONE"},
          {"action", "CHECK"}, {"t", 5.0}};
  auto [es, ack] = f.post("/api/session/" + id + "/event", ev);
  CHECK(es == 200);
  CHECK(ack["duplicate"] == false);
  CHECK(f.post("/api/session/" + id + "/event", ev).second["duplicate"] == true);
  ev["event_id"] = "h2";
  ev["stimulus"] = "BIRDS";
  CHECK(f.post("/api/session/" + id + "/event", ev).first == 400);

  auto [xs, exported] = f.get("/api/export");
  CHECK(xs == 200);
  CHECK(exported["schema"] == "sonimon.export/1");
  auto logs = export_from_json(exported);
  REQUIRE(logs.size() == 1);
  CHECK(logs[0].annotations.size() == 1);
  CHECK(logs[0].annotations[0].level_id == level_id);
  CHECK(f.get("/api/export?ecology=nature").second["sessions"].empty());
}

TEST_CASE("live stream delivers a whole level") {
  Fixture f("sonimon_http_stream", true);
  const auto id = f.post("/api/session").second["session_id"].get<std::string>();
  f.post("/api/session/" + id + "/advance");
  f.post("/api/session/" + id + "/advance");
  auto plan = f.get("/api/session/" + id + "/level/q1/plan").second;
  auto r = f.client->Get("/api/session/" + id + "/level/q1/stream");
  REQUIRE(r);
  CHECK(r->status == 200);
  REQUIRE(r->body.size() > 44);
  CHECK(r->body.substr(0, 4) == "RIFF");
  const double seconds = (r->body.size() - 44) / 2.0 / 44100.0;
  CHECK(seconds >= plan["duration"].get<double>());
  CHECK(seconds <= plan["duration"].get<double>() + 0.1);
}

TEST_CASE("static files are served when configured") {
  const auto web = fs::temp_directory_path() / "sonimon_http_static_root";
  fs::create_directories(web);
  std::ofstream(web / "index.html") << "<html>ok</html>";
  {
    Fixture f("sonimon_http_static", false, web);
    auto r = f.client->Get("/index.html");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->body == "<html>ok</html>");
  }
  fs::remove_all(web);
}

TEST_CASE("binding a busy port fails clearly") {
  Fixture f("sonimon_http_busy");
  HttpServer other(*f.service);
  CHECK_THROWS_AS(other.bind("127.0.0.1", f.server->port()), std::runtime_error);
}
