#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonimon/process_sim.hpp"

namespace sonimon {

using Json = nlohmann::json;

// Infinite hold is written as null.
Json to_json(const AnomalyEvent& e);
Json to_json(const Level& level);
AnomalyEvent event_from_json(const Json& j);
Level level_from_json(const Json& j);

// {"levels": [...]} document.
void write_scenario(const std::filesystem::path& path, const std::vector<Level>& levels);
// Accepts a scenario document or a single level object.
std::vector<Level> read_scenario(const std::filesystem::path& path);

// {"t": .., "wpd_w": .., "wpd_h": .., "ph": .., "wpt": .., "pt": ..}
std::string frame_to_line(const CriterionFrame& frame);
CriterionFrame frame_from_line(const std::string& line);
void write_frame_log(const std::filesystem::path& path, const std::vector<CriterionFrame>& frames);
std::vector<CriterionFrame> read_frame_log(const std::filesystem::path& path);

}  // namespace sonimon
