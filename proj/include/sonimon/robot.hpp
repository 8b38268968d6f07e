#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sonimon/session_log.hpp"

namespace sonimon {

// Scripted participant used for end-to-end runs.
struct RobotProfile {
  enum class Kind { Perfect, Sloppy };
  Kind kind = Kind::Perfect;
  double delay = 0.5;  // reaction after the tolerance onset, seconds
  double pmiss = 0.0;  // sloppy: chance to ignore an anomaly
  double pfa = 0.0;    // sloppy: chance to check an idle stimulus

  static RobotProfile perfect(double delay) { return {Kind::Perfect, delay, 0.0, 0.0}; }
  static RobotProfile sloppy(double pmiss, double pfa, double delay) { return {Kind::Sloppy, delay, pmiss, pfa}; }
};

struct RobotOptions {
  int sessions = 1;
  RobotProfile profile;
  std::uint64_t seed = 7;
  std::uint64_t level_seed = 1;  // must match the server's level set
  double symbol_time = 0.4;      // seconds per copied symbol
  double frame_rate = kDefaultFrameRate;
  bool fetch_audio = true;
};

// Events the robot sends for one level, in time order. Random choices use
// common random numbers keyed by (seed, session index, level, stimulus) so
// profiles differing only in pmiss/pfa stay comparable.
struct PlannedEvents {
  std::vector<AnnotationEvent> annotations;
  std::vector<SequenceEvent> sequences;
};
PlannedEvents plan_robot_level(const LevelRecord& level, EcologyId ecology, const RobotProfile& profile,
                               std::uint64_t seed, int session_index, bool qualifying, double symbol_time);

// Copy-task length schedule: 4 symbols, one more every 2 completions, at most 10.
int sequence_length(int completed);

struct RobotSession {
  std::string session_id;
  EcologyId ecology = EcologyId::Synth;
  int qualify_attempts = 0;
  int events = 0;
};

// Drives the full HTTP protocol against host:port. Throws std::runtime_error on
// any unexpected response.
std::vector<RobotSession> run_robot(const std::string& host, int port, const RobotOptions& options);

// GET /api/export.
Json fetch_export(const std::string& host, int port);

}  // namespace sonimon
