#include "sonimon/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sonimon {

Json to_json(const AnomalyEvent& e) {
  Json j;
  j["criterion"] = std::string(criterion_name(e.criterion));
  j["onset"] = e.onset;
  j["ramp"] = e.ramp;
  j["severity"] = e.severity;
  j["hold"] = std::isinf(e.hold) ? Json(nullptr) : Json(e.hold);
  return j;
}

Json to_json(const Level& level) {
  Json events = Json::array();
  for (const auto& e : level.events) events.push_back(to_json(e));
  return Json{{"id", level.id}, {"duration", level.duration}, {"seed", level.seed},
              {"events", std::move(events)}};
}

AnomalyEvent event_from_json(const Json& j) {
  AnomalyEvent e;
  e.criterion = parse_criterion(j.at("criterion").get<std::string>());
  e.onset = j.at("onset").get<double>();
  e.ramp = j.value("ramp", 0.0);
  e.severity = j.value("severity", 0.0);
  const auto hold = j.find("hold");
  if (hold == j.end() || hold->is_null()) {
    e.hold = std::numeric_limits<double>::infinity();
  } else if (hold->is_string()) {
    const auto s = hold->get<std::string>();
    if (s != "inf" && s != "infinity") throw std::invalid_argument("bad hold value: " + s);
    e.hold = std::numeric_limits<double>::infinity();
  } else {
    e.hold = hold->get<double>();
  }
  return e;
}

Level level_from_json(const Json& j) {
  Level level;
  level.id = j.at("id").get<std::string>();
  level.duration = j.value("duration", kDefaultLevelDuration);
  level.seed = j.value("seed", std::uint64_t{0});
  for (const auto& e : j.value("events", Json::array())) level.events.push_back(event_from_json(e));
  validate_level(level);
  return level;
}

void write_scenario(const std::filesystem::path& path, const std::vector<Level>& levels) {
  Json doc;
  doc["levels"] = Json::array();
  for (const auto& l : levels) doc["levels"].push_back(to_json(l));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Level> read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const Json doc = Json::parse(in);
  std::vector<Level> levels;
  if (doc.contains("levels")) {
    for (const auto& l : doc.at("levels")) levels.push_back(level_from_json(l));
  } else {
    levels.push_back(level_from_json(doc));
  }
  return levels;
}

std::string frame_to_line(const CriterionFrame& frame) {
  // Insertion order is kept so the line layout is stable.
  nlohmann::ordered_json j;
  j["t"] = frame.t;
  for (CriterionId id : kAllCriteria) j[std::string(log_key(id))] = frame[id];
  return j.dump();
}

CriterionFrame frame_from_line(const std::string& line) {
  const Json j = Json::parse(line);
  CriterionFrame f;
  f.t = j.at("t").get<double>();
  for (CriterionId id : kAllCriteria) f[id] = j.at(std::string(log_key(id))).get<double>();
  return f;
}

void write_frame_log(const std::filesystem::path& path, const std::vector<CriterionFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& f : frames) out << frame_to_line(f) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<CriterionFrame> read_frame_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<CriterionFrame> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    frames.push_back(frame_from_line(line));
  }
  return frames;
}

}  // namespace sonimon
