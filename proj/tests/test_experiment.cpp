#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "sonimon/experiment.hpp"
#include "sonimon/rng.hpp"

using namespace sonimon;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

Config config_for(const fs::path& dir, std::vector<EcologyId> enabled = {EcologyId::Synth, EcologyId::Nature}) {
  Config c;
  c.data_dir = dir;
  c.enabled_ecologies = std::move(enabled);
  c.fsync = false;
  return c;
}

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 200;
}

int counter = 0;
std::string next_id() { return "e" + std::to_string(++counter); }

Json annotation(const std::string& level, Stimulus s, double t, Action a = Action::Check) {
  return Json{{"type", "annotation"}, {"event_id", next_id()}, {"level_id", level},
              {"stimulus", std::string(stimulus_name(s))}, {"action", std::string(action_name(a))}, {"t", t}};
}

Json sequence(const std::string& level, double at) {
  return Json{{"type", "sequence"}, {"event_id", next_id()}, {"level_id", level},
              {"sequence_len", 4}, {"completed_at", at}, {"duration", 1.6}};
}

// Plays the active qualifying level perfectly (or not) and advances.
Json play_qualify(ExperimentService& svc, const std::string& id, bool well) {
  auto state = svc.session_state(id);
  const auto level_id = state["active_level"].get<std::string>();
  const auto eco = parse_ecology(state["ecology"].get<std::string>());
  const Level* level = nullptr;
  for (const auto& l : svc.qualify_levels())
    if (l.id == level_id) level = &l;
  REQUIRE(level);
  if (well) {
    const auto rec = make_level_record(*level, eco);
    for (const auto& [s, onset] : rec.onsets) svc.record_event(id, annotation(level_id, s, onset + 0.5));
  }
  svc.record_event(id, sequence(level_id, 2.0));
  return svc.advance(id, Json::object());
}

void to_main(ExperimentService& svc, const std::string& id) {
  svc.advance(id, Json::object());
  svc.advance(id, Json::object());
  while (svc.session_state(id)["phase"] != "MAIN") play_qualify(svc, id, true);
}

Json survey_body(Answer a = Answer::Agree) {
  Json answers = Json::array();
  for (int i = 0; i < 7; ++i) answers.push_back(std::string(answer_name(a)));
  return Json{{"age", 30}, {"gender", "x"}, {"answers", answers}, {"comment", ""}};
}

void finish(ExperimentService& svc, const std::string& id) {
  to_main(svc, id);
  for (int k = 0; k < 10; ++k) svc.advance(id, Json{{"level", k}});
  svc.submit_survey(id, survey_body());
}

}  // namespace

TEST_CASE("ecology assignment is balanced") {
  const std::vector<EcologyId> two = {EcologyId::Synth, EcologyId::Nature};
  CHECK(assign_ecology({{EcologyId::Synth, 3}, {EcologyId::Nature, 2}}, two, 0) == EcologyId::Nature);
  CHECK(assign_ecology({{EcologyId::Synth, 1}}, two, 5) == EcologyId::Nature);
  // Ties go through the tie-break value.
  CHECK(assign_ecology({}, two, 0) == EcologyId::Synth);
  CHECK(assign_ecology({}, two, 1) == EcologyId::Nature);
  // Disabled ecologies are never chosen even with fewer completions.
  CHECK(assign_ecology({{EcologyId::Synth, 5}, {EcologyId::Nature, 5}}, two, 2) != EcologyId::Mixed);
  CHECK_THROWS(assign_ecology({}, {}, 0));

  // Property: counts never drift apart by more than one.
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<EcologyId, int> done;
    std::vector<EcologyId> enabled(kAllEcologies.begin(), kAllEcologies.end());
    for (int i = 0; i < 30; ++i) {
      ++done[assign_ecology(done, enabled, rng.next())];
      int lo = 1 << 30, hi = 0;
      for (EcologyId e : enabled) {
        lo = std::min(lo, done[e]);
        hi = std::max(hi, done[e]);
      }
      CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("qualifying rule") {
  const auto level = training_level_set(1)[1];
  const auto rec = make_level_record(level, EcologyId::Synth);
  REQUIRE(rec.onsets.size() == 2);
  std::vector<AnnotationEvent> hits;
  for (const auto& [s, onset] : rec.onsets) hits.push_back({next_id(), level.id, s, Action::Check, onset + 0.3, 0, 0});
  std::vector<SequenceEvent> seq = {{next_id(), level.id, 4, 3.0, 1.6, 0, 0}};
  CHECK(qualify_passed(rec, hits, seq));
  CHECK_FALSE(qualify_passed(rec, hits, {}));
  auto missing = hits;
  missing.pop_back();
  CHECK_FALSE(qualify_passed(rec, missing, seq));

  auto one_fa = hits;
  one_fa.push_back({next_id(), level.id, Stimulus::Bell, Action::Check, 1.0, 0, 0});
  CHECK(qualify_passed(rec, one_fa, seq));
  auto two_fa = one_fa;
  two_fa.push_back({next_id(), level.id, Stimulus::Jingle, Action::Check, 1.0, 0, 0});
  CHECK_FALSE(qualify_passed(rec, two_fa, seq));
}

TEST_CASE("session lifecycle") {
  TempDir dir("sonimon_exp_lifecycle");
  ExperimentService svc(config_for(dir.path));
  auto st = svc.create_session();
  const auto id = st["session_id"].get<std::string>();
  CHECK(st["phase"] == "TRAINING_TASK");
  CHECK(st["stimulus_labels"].size() == 4);
  CHECK(st["level_count"] == 10);
  CHECK(st["active_level"].is_null());

  CHECK(svc.advance(id, Json{{"phase", "TRAINING_TASK"}})["phase"] == "TRAINING_STIMULI");
  // Out-of-order transition.
  CHECK(status_of([&] { svc.advance(id, Json{{"phase", "TRAINING_TASK"}}); }) == 409);
  CHECK(svc.advance(id, Json::object())["phase"] == "TRAINING_QUALIFY");

  // Main levels stay locked until two qualifying passes.
  CHECK(status_of([&] { svc.plan(id, "0"); }) == 409);
  auto failed = play_qualify(svc, id, false);
  CHECK(failed["passed"] == false);
  CHECK(failed["phase"] == "TRAINING_QUALIFY");
  CHECK(play_qualify(svc, id, true)["passed"] == true);
  CHECK(status_of([&] { svc.plan(id, "0"); }) == 409);
  auto second = play_qualify(svc, id, true);
  CHECK(second["passed"] == true);
  CHECK(second["phase"] == "MAIN");
  CHECK(second["qualify_attempts"] == 3);

  auto plan = svc.plan(id, "0");
  CHECK(plan["duration"] == 30.0);
  CHECK(plan["level_id"] == svc.session_state(id)["active_level"]);
  CHECK(status_of([&] { svc.plan(id, "q"); }) == 409);
  CHECK(status_of([&] { svc.plan(id, "10"); }) == 404);
  CHECK(status_of([&] { svc.plan(id, "x1"); }) == 404);

  CHECK(status_of([&] { svc.advance(id, Json{{"level", 3}}); }) == 409);
  for (int k = 0; k < 10; ++k) svc.advance(id, Json{{"level", k}});
  CHECK(svc.session_state(id)["phase"] == "SURVEY");
  CHECK(status_of([&] { svc.advance(id, Json::object()); }) == 409);
  CHECK(status_of([&] { svc.record_event(id, sequence("x", 1.0)); }) == 409);
  CHECK(status_of([&] { svc.submit_survey(id, Json{{"answers", Json::array({"AGREE"})}}); }) == 400);
  CHECK(svc.submit_survey(id, survey_body())["phase"] == "DONE");
  CHECK(status_of([&] { svc.submit_survey(id, survey_body()); }) == 409);
  CHECK(status_of([&] { svc.advance(id, Json::object()); }) == 409);
  CHECK(status_of([&] { svc.session_state("nope"); }) == 404);
}

TEST_CASE("event validation and idempotency") {
  TempDir dir("sonimon_exp_events");
  ExperimentService svc(config_for(dir.path, {EcologyId::Synth}));
  const auto id = svc.create_session()["session_id"].get<std::string>();
  CHECK(status_of([&] { svc.record_event(id, annotation("x", Stimulus::Drone, 1.0)); }) == 409);
  to_main(svc, id);
  const auto level = svc.session_state(id)["active_level"].get<std::string>();

  auto body = annotation(level, Stimulus::Drone, 12.5);
  auto ack = svc.record_event(id, body);
  CHECK(ack["duplicate"] == false);
  CHECK(svc.record_event(id, body)["duplicate"] == true);

  CHECK(status_of([&] { svc.record_event(id, annotation(level, Stimulus::Birds, 1.0)); }) == 400);
  CHECK(status_of([&] { svc.record_event(id, annotation(level, Stimulus::Drone, 31.0)); }) == 400);
  CHECK(status_of([&] { svc.record_event(id, annotation(level, Stimulus::Drone, -0.1)); }) == 400);
  CHECK(status_of([&] { svc.record_event(id, annotation("other", Stimulus::Drone, 1.0)); }) == 409);
  auto no_id = annotation(level, Stimulus::Drone, 1.0);
  no_id.erase("event_id");
  CHECK(status_of([&] { svc.record_event(id, no_id); }) == 400);
  auto bad_action = annotation(level, Stimulus::Drone, 1.0);
  bad_action["action"] = "TOGGLE";
  CHECK(status_of([&] { svc.record_event(id, bad_action); }) == 400);
  auto bad_type = annotation(level, Stimulus::Drone, 1.0);
  bad_type["type"] = "mouse";
  CHECK(status_of([&] { svc.record_event(id, bad_type); }) == 400);
  CHECK(status_of([&] { svc.record_event(id, Json::array()); }) == 400);

  auto logs = svc.export_sessions();
  REQUIRE(logs.size() == 1);
  int main_events = 0;
  for (const auto& e : logs[0].annotations) main_events += e.level_id == level;
  CHECK(main_events == 1);
}

TEST_CASE("sessions are balanced across ecologies") {
  TempDir dir("sonimon_exp_balance");
  ExperimentService svc(config_for(dir.path));
  for (int i = 0; i < 4; ++i) {
    const auto id = svc.create_session()["session_id"].get<std::string>();
    finish(svc, id);
  }
  auto counts = svc.completed_counts();
  CHECK(counts[EcologyId::Synth] == 2);
  CHECK(counts[EcologyId::Nature] == 2);
  CHECK(counts[EcologyId::Mixed] == 0);
  CHECK(svc.export_sessions(EcologyId::Synth).size() == 2);
}

TEST_CASE("level order is a per-session permutation") {
  TempDir dir("sonimon_exp_order");
  ExperimentService svc(config_for(dir.path));
  std::set<std::vector<std::string>> orders;
  for (int i = 0; i < 5; ++i) {
    const auto id = svc.create_session()["session_id"].get<std::string>();
    to_main(svc, id);
    std::vector<std::string> order;
    for (int k = 0; k < 10; ++k) {
      order.push_back(svc.plan(id, std::to_string(k))["level_id"].get<std::string>());
    }
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::string> ids;
    for (const auto& l : svc.main_levels()) ids.push_back(l.id);
    std::sort(ids.begin(), ids.end());
    CHECK(sorted == ids);
    orders.insert(order);
  }
  CHECK(orders.size() > 1);
}

TEST_CASE("state survives a restart, torn lines included") {
  TempDir dir("sonimon_exp_replay");
  std::string done_id, open_id;
  std::vector<SessionLog> before;
  {
    ExperimentService svc(config_for(dir.path));
    done_id = svc.create_session()["session_id"].get<std::string>();
    finish(svc, done_id);
    open_id = svc.create_session()["session_id"].get<std::string>();
    to_main(svc, open_id);
    const auto level = svc.session_state(open_id)["active_level"].get<std::string>();
    svc.record_event(open_id, annotation(level, svc.session_state(open_id)["ecology"] == "SYNTH" ? Stimulus::Drone : Stimulus::Birds, 3.0));
    before = svc.export_sessions();
  }
  // A crash mid-write leaves half a record behind.
  const auto file = dir.path / "sessions" / (open_id + ".jsonl");
  { std::ofstream(file, std::ios::app) << R"({"type":"annotation","event_id":"half)"; }

  ExperimentService again(config_for(dir.path));
  CHECK(again.export_sessions() == before);
  CHECK(again.session_state(done_id)["phase"] == "DONE");
  CHECK(again.session_state(open_id)["phase"] == "MAIN");
  for (const auto& log : before) {
    if (log.session_id == done_id) CHECK(again.completed_counts()[log.ecology] == 1);
  }
  // The torn tail is gone and the file accepts new records.
  std::ifstream in(file);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.back() == '\n');
  const auto level = again.session_state(open_id)["active_level"].get<std::string>();
  CHECK(again.record_event(open_id, sequence(level, 5.0))["ok"] == true);

  // New sessions do not reuse ids.
  const auto fresh = again.create_session()["session_id"].get<std::string>();
  CHECK(fresh != done_id);
  CHECK(fresh != open_id);
}

TEST_CASE("concurrent events on one session are all kept") {
  TempDir dir("sonimon_exp_concurrent");
  ExperimentService svc(config_for(dir.path, {EcologyId::Synth}));
  const auto id = svc.create_session()["session_id"].get<std::string>();
  to_main(svc, id);
  const auto level = svc.session_state(id)["active_level"].get<std::string>();
  std::vector<Json> bodies;
  for (int i = 0; i < 200; ++i) bodies.push_back(annotation(level, Stimulus::Drone, i * 0.1, i % 2 ? Action::Uncheck : Action::Check));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      // Every thread sends every event; duplicates must collapse.
      for (int i = 0; i < 200; ++i) svc.record_event(id, bodies[(i + 50 * t) % 200]);
    });
  }
  for (auto& t : threads) t.join();
  int on_level = 0;
  for (const auto& a : svc.export_sessions()[0].annotations) on_level += a.level_id == level;
  CHECK(on_level == 200);
}

TEST_CASE("audio is rendered once and is a valid wav") {
  TempDir dir("sonimon_exp_audio");
  ExperimentService svc(config_for(dir.path, {EcologyId::Synth}));
  const auto id = svc.create_session()["session_id"].get<std::string>();
  svc.advance(id, Json::object());
  svc.advance(id, Json::object());
  auto a = svc.audio(id, "q1");
  auto b = svc.audio(id, "q1");
  CHECK(a.get() == b.get());
  auto wav = decode_wav(*a);
  CHECK(wav.duration() == doctest::Approx(svc.qualify_levels()[0].duration).epsilon(1e-3));
  CHECK(status_of([&] { svc.audio(id, "0"); }) == 409);
  CHECK(status_of([&] { svc.audio(id, "q9"); }) == 404);
}

TEST_CASE("storage failures surface as 503") {
  TempDir dir("sonimon_exp_storage");
  ExperimentService svc(config_for(dir.path, {EcologyId::Synth}));
  const auto id = svc.create_session()["session_id"].get<std::string>();
  fs::remove_all(dir.path / "sessions");
  CHECK(status_of([&] { svc.advance(id, Json::object()); }) == 503);
  // Nothing changed in memory.
  CHECK(svc.session_state(id)["phase"] == "TRAINING_TASK");
}
