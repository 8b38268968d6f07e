#include "sonimon/session_log.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sonimon {

namespace {

constexpr std::array<std::string_view, 6> kPhaseNames = {
    "TRAINING_TASK", "TRAINING_STIMULI", "TRAINING_QUALIFY", "MAIN", "SURVEY", "DONE"};
constexpr std::array<std::string_view, 2> kActionNames = {"CHECK", "UNCHECK"};
constexpr std::array<std::string_view, 3> kAnswerNames = {"DISAGREE", "SOMEWHAT", "AGREE"};

template <std::size_t N>
std::size_t lookup(const std::array<std::string_view, N>& names, std::string_view s, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return i;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(s));
}

double finite(const Json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(key) + " must be finite");
  return v;
}

// nlohmann errors become invalid_argument so callers see one error type.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

std::string_view phase_name(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }
Phase parse_phase(std::string_view name) { return static_cast<Phase>(lookup(kPhaseNames, name, "phase")); }
std::string_view action_name(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }
Action parse_action(std::string_view name) { return static_cast<Action>(lookup(kActionNames, name, "action")); }
std::string_view answer_name(Answer a) { return kAnswerNames[static_cast<std::size_t>(a)]; }
Answer parse_answer(std::string_view name) { return static_cast<Answer>(lookup(kAnswerNames, name, "answer")); }

double answer_score(Answer a) {
  switch (a) {
    case Answer::Disagree: return 0.0;
    case Answer::Somewhat: return 50.0;
    case Answer::Agree: return 100.0;
  }
  return 0.0;
}

LevelRecord make_level_record(const Level& level, EcologyId eco, double frame_rate) {
  LevelRecord r;
  r.level = level;
  const auto frames = generate_trajectory(level, frame_rate);
  const auto groups = group_onsets(tolerance_onset_times(level, frames));
  for (Stimulus s : ecology(eco).stimuli) {
    const auto it = groups.find(group_of(s));
    if (it != groups.end()) r.onsets[s] = it->second;
  }
  return r;
}

Json to_json(const AnnotationEvent& e) {
  return Json{{"event_id", e.event_id}, {"level_id", e.level_id},
              {"stimulus", std::string(stimulus_name(e.stimulus))},
              {"action", std::string(action_name(e.action))}, {"t", e.t},
              {"received_at", e.received_at}, {"round", e.round}};
}

Json to_json(const SequenceEvent& e) {
  return Json{{"event_id", e.event_id},         {"level_id", e.level_id},
              {"sequence_len", e.sequence_len}, {"completed_at", e.completed_at},
              {"duration", e.duration},         {"received_at", e.received_at},
              {"round", e.round}};
}

Json to_json(const SurveyResponse& s) {
  Json answers = Json::array();
  for (Answer a : s.answers) answers.push_back(std::string(answer_name(a)));
  return Json{{"age", s.age ? Json(*s.age) : Json(nullptr)},
              {"gender", s.gender ? Json(*s.gender) : Json(nullptr)},
              {"answers", std::move(answers)},
              {"comment", s.comment}};
}

Json to_json(const LevelRecord& r) {
  Json onsets = Json::object();
  for (const auto& [s, t] : r.onsets) onsets[std::string(stimulus_name(s))] = t;
  return Json{{"level", to_json(r.level)}, {"onsets", std::move(onsets)}};
}

Json to_json(const SessionLog& s) {
  Json levels = Json::array();
  for (const auto& l : s.levels) levels.push_back(to_json(l));
  Json annotations = Json::array();
  for (const auto& e : s.annotations) annotations.push_back(to_json(e));
  Json sequences = Json::array();
  for (const auto& e : s.sequences) sequences.push_back(to_json(e));
  return Json{{"session_id", s.session_id},
              {"ecology", std::string(ecology_name(s.ecology))},
              {"phase", std::string(phase_name(s.phase))},
              {"created_at", s.created_at},
              {"levels", std::move(levels)},
              {"annotations", std::move(annotations)},
              {"sequences", std::move(sequences)},
              {"survey", s.survey ? to_json(*s.survey) : Json(nullptr)}};
}

AnnotationEvent annotation_from_json(const Json& j) {
  return guarded("annotation event", [&] {
    AnnotationEvent e;
    e.event_id = j.at("event_id").get<std::string>();
    e.level_id = j.at("level_id").get<std::string>();
    e.stimulus = parse_stimulus(j.at("stimulus").get<std::string>());
    e.action = parse_action(j.at("action").get<std::string>());
    e.t = finite(j, "t");
    e.received_at = j.value("received_at", 0.0);
    e.round = j.value("round", 0);
    return e;
  });
}

SequenceEvent sequence_from_json(const Json& j) {
  return guarded("sequence event", [&] {
    SequenceEvent e;
    e.event_id = j.at("event_id").get<std::string>();
    e.level_id = j.at("level_id").get<std::string>();
    e.sequence_len = j.at("sequence_len").get<int>();
    e.completed_at = finite(j, "completed_at");
    e.duration = finite(j, "duration");
    e.received_at = j.value("received_at", 0.0);
    e.round = j.value("round", 0);
    if (e.sequence_len <= 0) throw std::invalid_argument("sequence_len must be positive");
    if (e.duration <= 0.0) throw std::invalid_argument("sequence duration must be positive");
    return e;
  });
}

SurveyResponse survey_from_json(const Json& j) {
  return guarded("survey response", [&] {
    SurveyResponse s;
    if (j.contains("age") && !j.at("age").is_null()) s.age = j.at("age").get<int>();
    if (j.contains("gender") && !j.at("gender").is_null()) s.gender = j.at("gender").get<std::string>();
    const auto& answers = j.at("answers");
    if (!answers.is_array() || answers.size() != kSurveyStatementCount) {
      throw std::invalid_argument("survey needs exactly 7 answers");
    }
    for (std::size_t i = 0; i < kSurveyStatementCount; ++i) {
      s.answers[i] = parse_answer(answers[i].get<std::string>());
    }
    s.comment = j.value("comment", std::string());
    return s;
  });
}

LevelRecord level_record_from_json(const Json& j) {
  return guarded("level record", [&] {
    LevelRecord r;
    r.level = level_from_json(j.at("level"));
    const Json onsets = j.value("onsets", Json::object());
    for (const auto& [k, v] : onsets.items()) {
      r.onsets[parse_stimulus(k)] = v.get<double>();
    }
    return r;
  });
}

SessionLog session_log_from_json(const Json& j) {
  return guarded("session log", [&] {
    SessionLog s;
    s.session_id = j.at("session_id").get<std::string>();
    s.ecology = parse_ecology(j.at("ecology").get<std::string>());
    s.phase = parse_phase(j.value("phase", std::string("DONE")));
    s.created_at = j.value("created_at", std::string());
    for (const auto& l : j.value("levels", Json::array())) s.levels.push_back(level_record_from_json(l));
    for (const auto& e : j.value("annotations", Json::array())) s.annotations.push_back(annotation_from_json(e));
    for (const auto& e : j.value("sequences", Json::array())) s.sequences.push_back(sequence_from_json(e));
    if (j.contains("survey") && !j.at("survey").is_null()) s.survey = survey_from_json(j.at("survey"));
    return s;
  });
}

Json export_to_json(const std::vector<SessionLog>& sessions) {
  Json list = Json::array();
  for (const auto& s : sessions) list.push_back(to_json(s));
  return Json{{"schema", std::string(kExportSchema)}, {"sessions", std::move(list)}};
}

std::vector<SessionLog> export_from_json(const Json& j) {
  return guarded("export", [&] {
    if (j.contains("schema") && j.at("schema").get<std::string>() != kExportSchema) {
      throw std::invalid_argument("unsupported export schema: " + j.at("schema").get<std::string>());
    }
    std::vector<SessionLog> out;
    for (const auto& s : j.at("sessions")) out.push_back(session_log_from_json(s));
    return out;
  });
}

void write_export(const std::filesystem::path& path, const std::vector<SessionLog>& sessions) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << export_to_json(sessions).dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<SessionLog> read_export(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::runtime_error("cannot parse " + path.string() + ": " + e.what());
  }
  return export_from_json(j);
}

}  // namespace sonimon
