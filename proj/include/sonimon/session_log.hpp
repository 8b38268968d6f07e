#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonimon/ecology.hpp"
#include "sonimon/process_sim.hpp"
#include "sonimon/scenario_io.hpp"

namespace sonimon {

inline constexpr std::string_view kExportSchema = "sonimon.export/1";
inline constexpr std::size_t kSurveyStatementCount = 7;

// Table order.
inline constexpr std::array<std::string_view, kSurveyStatementCount> kSurveyStatements = {
    "Easy to distinguish sounds", "Sounds distract from task", "Sounds are stressful",
    "Task is stressful",          "Task is fun",               "Task is difficult",
    "Task distracts from sounds"};

enum class Phase { TrainingTask, TrainingStimuli, TrainingQualify, Main, Survey, Done };
std::string_view phase_name(Phase p);  // "TRAINING_TASK", ...
Phase parse_phase(std::string_view name);

enum class Action { Check, Uncheck };
std::string_view action_name(Action a);
Action parse_action(std::string_view name);

enum class Answer { Disagree, Somewhat, Agree };
std::string_view answer_name(Answer a);
Answer parse_answer(std::string_view name);
double answer_score(Answer a);  // 0, 50, 100

struct AnnotationEvent {
  std::string event_id;
  std::string level_id;
  Stimulus stimulus = Stimulus::Arpeggio;
  Action action = Action::Check;
  double t = 0.0;
  double received_at = 0.0;  // server clock, seconds since epoch
  int round = 0;             // qualifying attempt the event belongs to

  bool operator==(const AnnotationEvent&) const = default;
};

struct SequenceEvent {
  std::string event_id;
  std::string level_id;
  int sequence_len = 0;
  double completed_at = 0.0;
  double duration = 0.0;
  double received_at = 0.0;
  int round = 0;

  bool operator==(const SequenceEvent&) const = default;
};

struct SurveyResponse {
  std::optional<int> age;
  std::optional<std::string> gender;
  std::array<Answer, kSurveyStatementCount> answers{};
  std::string comment;

  bool operator==(const SurveyResponse&) const = default;
};

// A played level with its scoring ground truth: tolerance onset per stimulus
// of the session's ecology (absent = no anomaly for that stimulus).
struct LevelRecord {
  Level level;
  std::map<Stimulus, double> onsets;

  bool operator==(const LevelRecord&) const = default;
};

struct SessionLog {
  std::string session_id;
  EcologyId ecology = EcologyId::Synth;
  Phase phase = Phase::TrainingTask;
  std::string created_at;
  std::vector<LevelRecord> levels;  // main levels in presentation order
  std::vector<AnnotationEvent> annotations;
  std::vector<SequenceEvent> sequences;
  std::optional<SurveyResponse> survey;

  bool operator==(const SessionLog&) const = default;
};

// Ground truth for one level under one ecology.
LevelRecord make_level_record(const Level& level, EcologyId ecology, double frame_rate = kDefaultFrameRate);

Json to_json(const AnnotationEvent& e);
Json to_json(const SequenceEvent& e);
Json to_json(const SurveyResponse& s);
Json to_json(const LevelRecord& r);
Json to_json(const SessionLog& s);

// Parsers validate field types and ranges and throw std::invalid_argument.
AnnotationEvent annotation_from_json(const Json& j);
SequenceEvent sequence_from_json(const Json& j);
SurveyResponse survey_from_json(const Json& j);
LevelRecord level_record_from_json(const Json& j);
SessionLog session_log_from_json(const Json& j);

Json export_to_json(const std::vector<SessionLog>& sessions);
std::vector<SessionLog> export_from_json(const Json& j);
void write_export(const std::filesystem::path& path, const std::vector<SessionLog>& sessions);
std::vector<SessionLog> read_export(const std::filesystem::path& path);

}  // namespace sonimon
