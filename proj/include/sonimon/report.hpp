#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sonimon/analysis.hpp"
#include "sonimon/scenario_io.hpp"
#include "sonimon/session_log.hpp"

namespace sonimon {

inline constexpr std::string_view kReportSchema = "sonimon.report/1";

struct Report {
  Json document;
  std::map<std::string, std::string> tables;  // file name -> CSV text
};

// Deterministic for a given export (sessions are processed in id order).
Report build_report(const std::vector<SessionLog>& sessions);

// Writes report.json and the CSV tables into dir, creating it if needed.
void write_report(const std::filesystem::path& dir, const Report& report);

}  // namespace sonimon
