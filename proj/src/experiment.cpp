#include "sonimon/experiment.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>

#include "sonimon/analysis.hpp"
#include "sonimon/log.hpp"
#include "sonimon/rng.hpp"
#include "sonimon/synth.hpp"

namespace sonimon {

namespace {

double now_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

std::string now_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ServiceError bad_request(const std::string& m) { return ServiceError(400, m); }
ServiceError conflict(const std::string& m) { return ServiceError(409, m); }

bool is_active_phase(Phase p) { return p == Phase::Main || p == Phase::TrainingQualify; }

}  // namespace

EcologyId assign_ecology(const std::map<EcologyId, int>& completed, const std::vector<EcologyId>& enabled,
                         std::uint64_t tie_break) {
  if (enabled.empty()) throw std::invalid_argument("no ecology enabled");
  auto count = [&](EcologyId e) {
    const auto it = completed.find(e);
    return it == completed.end() ? 0 : it->second;
  };
  int best = count(enabled.front());
  for (EcologyId e : enabled) best = std::min(best, count(e));
  std::vector<EcologyId> tied;
  for (EcologyId e : enabled) {
    if (count(e) == best) tied.push_back(e);
  }
  return tied[tie_break % tied.size()];
}

bool qualify_passed(const LevelRecord& level, std::span<const AnnotationEvent> annotations,
                    std::span<const SequenceEvent> sequences) {
  std::set<Stimulus> stimuli;
  for (const auto& e : annotations) stimuli.insert(e.stimulus);
  for (const auto& [s, _] : level.onsets) stimuli.insert(s);
  int false_alarms = 0;
  for (Stimulus s : stimuli) {
    std::vector<AnnotationEvent> mine;
    for (const auto& e : annotations) {
      if (e.stimulus == s) mine.push_back(e);
    }
    const auto it = level.onsets.find(s);
    const auto c = classify_trial(it == level.onsets.end() ? std::nullopt : std::optional<double>(it->second), mine);
    if (it != level.onsets.end() && c.outcome != Outcome::Hit) return false;
    if (c.outcome == Outcome::FalseAlarm) ++false_alarms;
  }
  return false_alarms <= 1 && !sequences.empty();
}

SessionStore::SessionStore(std::filesystem::path dir, bool fsync) : dir_(std::move(dir) / "sessions"), fsync_(fsync) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create data directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path SessionStore::path_for(const std::string& id) const { return dir_ / (id + ".jsonl"); }

bool SessionStore::exists(const std::string& id) const { return std::filesystem::exists(path_for(id)); }

void SessionStore::append(const std::string& id, const Json& record) {
  const std::string line = record.dump() + "\n";
  const auto path = path_for(id);
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error("cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = std::strerror(errno);
      ::close(fd);
      throw std::runtime_error("write failed on " + path.string() + ": " + err);
    }
    done += static_cast<std::size_t>(n);
  }
  if (fsync_ && ::fdatasync(fd) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw std::runtime_error("fsync failed on " + path.string() + ": " + err);
  }
  ::close(fd);
}

std::map<std::string, std::vector<Json>> SessionStore::load() {
  std::map<std::string, std::vector<Json>> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
    const auto id = entry.path().stem().string();
    std::ifstream in(entry.path(), std::ios::binary);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<Json> records;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      if (nl == std::string::npos) {
        // Torn write: never acked, so drop it and keep the file appendable.
        log_warning("dropping incomplete trailing record in " + entry.path().string());
        std::filesystem::resize_file(entry.path(), pos);
        break;
      }
      const auto line = text.substr(pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) continue;
      try {
        records.push_back(Json::parse(line));
      } catch (const Json::exception&) {
        log_warning("skipping unreadable record in " + entry.path().string());
      }
    }
    if (!records.empty()) out[id] = std::move(records);
  }
  return out;
}

ExperimentService::ExperimentService(Config config)
    : config_(std::move(config)), store_(config_.data_dir, config_.fsync) {
  validate_config(config_);
  main_levels_ = default_level_set(config_.level_seed);
  qualify_levels_ = training_level_set(config_.level_seed);
  if (config_.asset_dir) {
    assets_ = AssetLibrary::load(*config_.asset_dir, config_.sample_rate);
    for (const auto& w : assets_.warnings()) log_warning(w);
  }
  for (const auto& [id, records] : store_.load()) {
    try {
      replay(id, records);
    } catch (const std::exception& e) {
      log_warning("ignoring session " + id + ": " + e.what());
    }
  }
  counter_ = sessions_.size();
}

void ExperimentService::replay(const std::string& id, const std::vector<Json>& records) {
  auto s = std::make_shared<Session>();
  bool have_header = false;
  for (const auto& r : records) {
    const auto type = r.value("type", std::string());
    if (type == "session") {
      s->id = r.at("session_id").get<std::string>();
      s->ecology = parse_ecology(r.at("ecology").get<std::string>());
      s->seed = r.at("seed").get<std::uint64_t>();
      s->created_at = r.value("created_at", std::string());
      s->level_order = r.at("level_order").get<std::vector<std::string>>();
      have_header = true;
    } else if (type == "state") {
      s->phase = parse_phase(r.at("phase").get<std::string>());
      s->qualify_passes = r.at("qualify_passes").get<int>();
      s->qualify_attempts = r.at("qualify_attempts").get<int>();
      s->main_completed = r.at("main_completed").get<int>();
    } else if (type == "annotation") {
      auto e = annotation_from_json(r);
      if (s->event_ids.insert(e.event_id).second) s->annotations.push_back(std::move(e));
    } else if (type == "sequence") {
      auto e = sequence_from_json(r);
      if (s->event_ids.insert(e.event_id).second) s->sequences.push_back(std::move(e));
    } else if (type == "survey") {
      s->survey = survey_from_json(r);
      s->phase = Phase::Done;
    }
  }
  if (!have_header || s->id != id) throw std::runtime_error("missing session header");
  for (const auto& l : s->level_order) level_by_id(l);
  if (s->phase == Phase::Done) ++completed_[s->ecology];
  sessions_[id] = std::move(s);
}

std::shared_ptr<ExperimentService::Session> ExperimentService::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session: " + id);
  return it->second;
}

const Level& ExperimentService::level_by_id(const std::string& level_id) const {
  for (const auto& l : main_levels_) {
    if (l.id == level_id) return l;
  }
  for (const auto& l : qualify_levels_) {
    if (l.id == level_id) return l;
  }
  throw std::runtime_error("unknown level: " + level_id);
}

const Level& ExperimentService::qualify_level(const Session& s) const {
  return qualify_levels_[static_cast<std::size_t>(s.qualify_attempts) % qualify_levels_.size()];
}

std::optional<std::string> ExperimentService::active_level(const Session& s) const {
  if (s.phase == Phase::TrainingQualify) return qualify_level(s).id;
  if (s.phase == Phase::Main) return s.level_order[static_cast<std::size_t>(s.main_completed)];
  return std::nullopt;
}

// "q" is the current qualifying level, "q1".."q3" a specific one, digits a
// main level by presentation index.
const Level& ExperimentService::level_for_key(const Session& s, const std::string& key) const {
  if (!key.empty() && key[0] == 'q') {
    if (s.phase != Phase::TrainingTask && s.phase != Phase::TrainingStimuli && s.phase != Phase::TrainingQualify) {
      throw conflict("training levels are only available during training");
    }
    if (key == "q") return qualify_level(s);
    const auto n = std::atoi(key.c_str() + 1);
    if (n < 1 || static_cast<std::size_t>(n) > qualify_levels_.size() || key != "q" + std::to_string(n)) {
      throw ServiceError(404, "unknown training level: " + key);
    }
    return qualify_levels_[static_cast<std::size_t>(n - 1)];
  }
  if (key.empty() || !std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isdigit(c); }) ||
      key.size() > 3) {
    throw ServiceError(404, "unknown level: " + key);
  }
  const auto k = static_cast<std::size_t>(std::stoi(key));
  if (k >= s.level_order.size()) throw ServiceError(404, "level index out of range: " + key);
  if (s.phase != Phase::Main) {
    throw conflict("main levels unlock after " + std::to_string(kQualifyPassesNeeded) + " qualifying passes");
  }
  return level_by_id(s.level_order[k]);
}

const LevelRecord& ExperimentService::record_for(EcologyId eco, const Level& level) {
  std::lock_guard lock(cache_mutex_);
  const auto key = std::make_pair(eco, level.id);
  auto it = records_.find(key);
  if (it == records_.end()) it = records_.emplace(key, make_level_record(level, eco, config_.frame_rate)).first;
  return it->second;
}

Json ExperimentService::state_json(const Session& s) const {
  Json labels = Json::array();
  for (Stimulus st : ecology(s.ecology).stimuli) labels.push_back(std::string(stimulus_label(st)));
  const auto active = active_level(s);
  return Json{{"session_id", s.id},
              {"ecology", std::string(ecology_name(s.ecology))},
              {"stimulus_labels", std::move(labels)},
              {"phase", std::string(phase_name(s.phase))},
              {"qualify_passes", s.qualify_passes},
              {"qualify_attempts", s.qualify_attempts},
              {"main_completed", s.main_completed},
              {"level_count", s.level_order.size()},
              {"active_level", active ? Json(*active) : Json(nullptr)}};
}

Json ExperimentService::state_record(const Session& s) const {
  return Json{{"type", "state"},
              {"phase", std::string(phase_name(s.phase))},
              {"qualify_passes", s.qualify_passes},
              {"qualify_attempts", s.qualify_attempts},
              {"main_completed", s.main_completed}};
}

Json ExperimentService::create_session() {
  std::lock_guard lock(mutex_);
  std::uint64_t n = counter_;
  std::string id;
  std::uint64_t seed = 0;
  do {
    seed = mix_seed(config_.session_seed, n);
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%04llu-%08llx", static_cast<unsigned long long>(n),
                  static_cast<unsigned long long>(seed & 0xFFFFFFFFULL));
    id = buf;
    ++n;
  } while (sessions_.count(id) || store_.exists(id));

  auto s = std::make_shared<Session>();
  s->id = id;
  s->seed = seed;
  s->ecology = assign_ecology(completed_, config_.enabled_ecologies, mix_seed(seed, 0xEC0));
  s->created_at = now_iso8601();
  for (const auto& l : main_levels_) s->level_order.push_back(l.id);
  Rng rng(mix_seed(seed, 0x0DE5));
  for (std::size_t i = s->level_order.size(); i > 1; --i) {
    std::swap(s->level_order[i - 1], s->level_order[rng.below(i)]);
  }

  try {
    store_.append(id, Json{{"type", "session"},
                           {"session_id", id},
                           {"ecology", std::string(ecology_name(s->ecology))},
                           {"seed", seed},
                           {"created_at", s->created_at},
                           {"level_order", s->level_order}});
    store_.append(id, state_record(*s));
  } catch (const std::runtime_error& e) {
    throw ServiceError(503, std::string("storage unavailable: ") + e.what());
  }
  counter_ = n;
  sessions_[id] = s;
  log_info("session " + id + " assigned " + std::string(ecology_name(s->ecology)));
  return state_json(*s);
}

Json ExperimentService::session_state(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  return state_json(*s);
}

Json ExperimentService::advance(const std::string& id, const Json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (body.is_object() && body.contains("phase")) {
    const auto claimed = body.at("phase").get<std::string>();
    if (claimed != phase_name(s->phase)) {
      throw conflict("out-of-order transition: session is in " + std::string(phase_name(s->phase)));
    }
  }

  Session next;
  next.phase = s->phase;
  next.qualify_passes = s->qualify_passes;
  next.qualify_attempts = s->qualify_attempts;
  next.main_completed = s->main_completed;
  std::optional<bool> passed;
  switch (s->phase) {
    case Phase::TrainingTask: next.phase = Phase::TrainingStimuli; break;
    case Phase::TrainingStimuli: next.phase = Phase::TrainingQualify; break;
    case Phase::TrainingQualify: {
      const Level& level = qualify_level(*s);
      std::vector<AnnotationEvent> ann;
      for (const auto& e : s->annotations) {
        if (e.level_id == level.id && e.round == s->qualify_attempts) ann.push_back(e);
      }
      std::vector<SequenceEvent> seq;
      for (const auto& e : s->sequences) {
        if (e.level_id == level.id && e.round == s->qualify_attempts) seq.push_back(e);
      }
      passed = qualify_passed(record_for(s->ecology, level), ann, seq);
      ++next.qualify_attempts;
      if (*passed) ++next.qualify_passes;
      if (next.qualify_passes >= kQualifyPassesNeeded) next.phase = Phase::Main;
      break;
    }
    case Phase::Main: {
      if (body.is_object() && body.contains("level")) {
        const auto k = body.at("level").get<int>();
        if (k != s->main_completed) throw conflict("level " + std::to_string(k) + " is not the active level");
      }
      ++next.main_completed;
      if (next.main_completed >= static_cast<int>(s->level_order.size())) next.phase = Phase::Survey;
      break;
    }
    case Phase::Survey: throw conflict("the survey must be submitted to finish the session");
    case Phase::Done: throw conflict("session is complete");
  }

  try {
    store_.append(id, state_record(next));
  } catch (const std::runtime_error& e) {
    throw ServiceError(503, std::string("storage unavailable: ") + e.what());
  }
  s->phase = next.phase;
  s->qualify_passes = next.qualify_passes;
  s->qualify_attempts = next.qualify_attempts;
  s->main_completed = next.main_completed;
  Json out = state_json(*s);
  if (passed) out["passed"] = *passed;
  return out;
}

Json ExperimentService::record_event(const std::string& id, const Json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (!is_active_phase(s->phase)) {
    throw conflict("stale session: no level is active in phase " + std::string(phase_name(s->phase)));
  }
  if (!body.is_object()) throw bad_request("event must be an object");
  const auto event_id = body.value("event_id", std::string());
  if (event_id.empty()) throw bad_request("event_id is required");
  if (s->event_ids.count(event_id)) return Json{{"ok", true}, {"duplicate", true}, {"event_id", event_id}};

  const auto active = *active_level(*s);
  const auto level_id = body.value("level_id", std::string());
  if (level_id != active) throw conflict("event targets " + level_id + " but the active level is " + active);
  const double duration = level_by_id(active).duration;
  const int round = s->phase == Phase::TrainingQualify ? s->qualify_attempts : 0;

  Json record = body;
  record["received_at"] = now_seconds();
  record["round"] = round;
  const auto type = body.value("type", std::string("annotation"));
  record.erase("type");
  try {
    if (type == "annotation") {
      auto e = annotation_from_json(record);
      const auto& stimuli = ecology(s->ecology).stimuli;
      if (std::find(stimuli.begin(), stimuli.end(), e.stimulus) == stimuli.end()) {
        throw bad_request(std::string(stimulus_name(e.stimulus)) + " is not part of this session's ecology");
      }
      if (e.t < 0.0 || e.t > duration) throw bad_request("t outside the level");
      Json stored = to_json(e);
      stored["type"] = "annotation";
      store_.append(id, stored);
      s->annotations.push_back(std::move(e));
    } else if (type == "sequence") {
      auto e = sequence_from_json(record);
      if (e.completed_at < 0.0 || e.completed_at > duration) throw bad_request("completed_at outside the level");
      Json stored = to_json(e);
      stored["type"] = "sequence";
      store_.append(id, stored);
      s->sequences.push_back(std::move(e));
    } else {
      throw bad_request("unknown event type: " + type);
    }
  } catch (const std::invalid_argument& e) {
    throw bad_request(e.what());
  } catch (const ServiceError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw ServiceError(503, std::string("storage unavailable: ") + e.what());
  }
  s->event_ids.insert(event_id);
  return Json{{"ok", true}, {"duplicate", false}, {"event_id", event_id}};
}

Json ExperimentService::submit_survey(const std::string& id, const Json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->phase != Phase::Survey) throw conflict("survey is not open in phase " + std::string(phase_name(s->phase)));
  SurveyResponse r;
  try {
    r = survey_from_json(body);
  } catch (const std::invalid_argument& e) {
    throw bad_request(e.what());
  }
  Json stored = to_json(r);
  stored["type"] = "survey";
  try {
    store_.append(id, stored);
    Session done;
    done.phase = Phase::Done;
    done.qualify_passes = s->qualify_passes;
    done.qualify_attempts = s->qualify_attempts;
    done.main_completed = s->main_completed;
    store_.append(id, state_record(done));
  } catch (const std::runtime_error& e) {
    throw ServiceError(503, std::string("storage unavailable: ") + e.what());
  }
  s->survey = r;
  s->phase = Phase::Done;
  {
    std::lock_guard g(mutex_);
    ++completed_[s->ecology];
  }
  return state_json(*s);
}

Json ExperimentService::plan(const std::string& id, const std::string& key) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  const Level& level = level_for_key(*s, key);
  const int round = key[0] == 'q' ? s->qualify_attempts : 0;
  Json labels = Json::array();
  for (Stimulus st : ecology(s->ecology).stimuli) labels.push_back(std::string(stimulus_label(st)));
  return Json{{"level_id", level.id},
              {"duration", level.duration},
              {"sequence_seed", mix_seed(s->seed, hash_string(level.id) + static_cast<std::uint64_t>(round))},
              {"stimulus_labels", std::move(labels)},
              {"live_audio", config_.live_audio}};
}

std::pair<Level, EcologyId> ExperimentService::resolve(const std::string& id, const std::string& key) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  return {level_for_key(*s, key), s->ecology};
}

std::shared_ptr<const std::vector<std::uint8_t>> ExperimentService::audio(const std::string& id,
                                                                          const std::string& key) {
  const auto [level, eco] = resolve(id, key);
  std::shared_future<std::shared_ptr<const std::vector<std::uint8_t>>> fut;
  std::promise<std::shared_ptr<const std::vector<std::uint8_t>>> promise;
  bool owner = false;
  {
    std::lock_guard lock(cache_mutex_);
    const auto ck = std::make_pair(eco, level.id);
    auto it = audio_cache_.find(ck);
    if (it == audio_cache_.end()) {
      fut = promise.get_future().share();
      audio_cache_.emplace(ck, fut);
      owner = true;
    } else {
      fut = it->second;
    }
  }
  if (owner) {
    try {
      MixOptions opt;
      opt.sample_rate = config_.sample_rate;
      opt.assets = assets_.empty() ? nullptr : &assets_;
      const auto frames = generate_trajectory(level, config_.frame_rate);
      const auto mix = mix_level(frames, eco, mix_seed(level.seed, static_cast<std::uint64_t>(eco)), opt);
      promise.set_value(std::make_shared<const std::vector<std::uint8_t>>(encode_wav(mix.mix)));
    } catch (...) {
      {
        std::lock_guard lock(cache_mutex_);
        audio_cache_.erase(std::make_pair(eco, level.id));
      }
      promise.set_exception(std::current_exception());
    }
  }
  return fut.get();
}

std::vector<SessionLog> ExperimentService::export_sessions(std::optional<EcologyId> filter) {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [_, s] : sessions_) all.push_back(s);
  }
  std::vector<SessionLog> out;
  for (const auto& s : all) {
    std::lock_guard lock(s->mutex);
    if (filter && s->ecology != *filter) continue;
    SessionLog log;
    log.session_id = s->id;
    log.ecology = s->ecology;
    log.phase = s->phase;
    log.created_at = s->created_at;
    for (int k = 0; k < s->main_completed; ++k) {
      log.levels.push_back(record_for(s->ecology, level_by_id(s->level_order[static_cast<std::size_t>(k)])));
    }
    log.annotations = s->annotations;
    std::stable_sort(log.annotations.begin(), log.annotations.end(),
                     [](const AnnotationEvent& a, const AnnotationEvent& b) { return a.t < b.t; });
    log.sequences = s->sequences;
    std::stable_sort(log.sequences.begin(), log.sequences.end(),
                     [](const SequenceEvent& a, const SequenceEvent& b) { return a.completed_at < b.completed_at; });
    log.survey = s->survey;
    out.push_back(std::move(log));
  }
  return out;
}

std::map<EcologyId, int> ExperimentService::completed_counts() {
  std::lock_guard lock(mutex_);
  return completed_;
}

}  // namespace sonimon
