#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sonimon/config.hpp"
#include "sonimon/session_log.hpp"
#include "sonimon/voices.hpp"

namespace sonimon {

inline constexpr int kQualifyPassesNeeded = 2;

// Carries the HTTP status the request should fail with.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Fewest completed sessions among the enabled ecologies; ties broken by
// `tie_break` (any value, reduced modulo the number of tied ecologies).
EcologyId assign_ecology(const std::map<EcologyId, int>& completed, const std::vector<EcologyId>& enabled,
                         std::uint64_t tie_break);

// Qualifying rule: every present anomaly hit, at most one false alarm and at
// least one copied sequence.
bool qualify_passed(const LevelRecord& level, std::span<const AnnotationEvent> annotations,
                    std::span<const SequenceEvent> sequences);

// Append-only JSONL files, one per session, under <dir>/sessions.
class SessionStore {
 public:
  SessionStore(std::filesystem::path dir, bool fsync);

  // Durable once this returns.
  void append(const std::string& session_id, const Json& record);
  // Every session's records. A torn last line is dropped (and truncated away);
  // other unparsable lines are skipped with a warning.
  std::map<std::string, std::vector<Json>> load();
  bool exists(const std::string& session_id) const;

 private:
  std::filesystem::path path_for(const std::string& session_id) const;
  std::filesystem::path dir_;
  bool fsync_;
};

class ExperimentService {
 public:
  explicit ExperimentService(Config config);

  const Config& config() const { return config_; }
  const std::vector<Level>& main_levels() const { return main_levels_; }
  const std::vector<Level>& qualify_levels() const { return qualify_levels_; }

  // All responses are JSON objects; failures throw ServiceError.
  Json create_session();
  Json session_state(const std::string& id);
  Json advance(const std::string& id, const Json& body);
  Json record_event(const std::string& id, const Json& body);
  Json submit_survey(const std::string& id, const Json& body);
  Json plan(const std::string& id, const std::string& level_key);

  // WAV bytes, rendered once per (ecology, level) and cached.
  std::shared_ptr<const std::vector<std::uint8_t>> audio(const std::string& id, const std::string& level_key);
  // Level and ecology for a level key, with the same phase checks as audio().
  std::pair<Level, EcologyId> resolve(const std::string& id, const std::string& level_key);

  std::vector<SessionLog> export_sessions(std::optional<EcologyId> filter = std::nullopt);
  std::map<EcologyId, int> completed_counts();

 private:
  struct Session {
    std::mutex mutex;
    std::string id;
    EcologyId ecology = EcologyId::Synth;
    std::uint64_t seed = 0;
    std::string created_at;
    std::vector<std::string> level_order;
    Phase phase = Phase::TrainingTask;
    int qualify_passes = 0;
    int qualify_attempts = 0;
    int main_completed = 0;
    std::vector<AnnotationEvent> annotations;
    std::vector<SequenceEvent> sequences;
    std::optional<SurveyResponse> survey;
    std::set<std::string> event_ids;
  };

  std::shared_ptr<Session> find(const std::string& id);
  void replay(const std::string& id, const std::vector<Json>& records);
  Json state_json(const Session& s) const;
  Json state_record(const Session& s) const;
  const Level& level_by_id(const std::string& level_id) const;
  const Level& qualify_level(const Session& s) const;
  std::optional<std::string> active_level(const Session& s) const;
  const Level& level_for_key(const Session& s, const std::string& key) const;
  const LevelRecord& record_for(EcologyId eco, const Level& level);

  Config config_;
  SessionStore store_;
  AssetLibrary assets_;
  std::vector<Level> main_levels_;
  std::vector<Level> qualify_levels_;

  std::mutex mutex_;  // sessions_, counter_, completed_
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::map<EcologyId, int> completed_;

  std::mutex cache_mutex_;
  std::map<std::pair<EcologyId, std::string>, std::shared_future<std::shared_ptr<const std::vector<std::uint8_t>>>>
      audio_cache_;
  std::map<std::pair<EcologyId, std::string>, LevelRecord> records_;
};

}  // namespace sonimon
